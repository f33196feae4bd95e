"""Exact density-greedy allocation and EFk certification under budget constraints."""

__version__ = "0.1.0"

from fairknap.core import (  # noqa: E402
    INFINITE,
    Allocation,
    Family,
    Good,
    Instance,
    bundle_size,
    bundle_value,
    density,
    is_feasible,
    validate_instance,
)
from fairknap.greedy import CharityPolicy, GreedyResult, densest_greedy, replay  # noqa: E402
from fairknap.verify import EnvyWitness, ef_count, is_efk, worst_witness  # noqa: E402
from fairknap.forge import integerize, perturb_distinct, tightness_instance  # noqa: E402

__all__ = [
    "INFINITE", "Allocation", "Family", "Good", "Instance", "bundle_size", "bundle_value",
    "density", "is_feasible", "validate_instance", "CharityPolicy", "GreedyResult",
    "densest_greedy", "replay", "EnvyWitness", "ef_count", "is_efk", "worst_witness",
    "integerize", "perturb_distinct", "tightness_instance",
]
