"""Instance construction: seeded generators, the tightness instance, and the
integerize / distinct-density perturbation pipeline."""
from __future__ import annotations

import math
import random
import warnings
from dataclasses import dataclass
from fractions import Fraction

from fairknap.core import Allocation, Family, Good, Instance, density
from fairknap.errors import MismatchedInstances, MustIntegerize, UnsupportedFamily

MAX_DENOMINATOR = 12
PERTURB_WARN_M = 16


@dataclass(frozen=True)
class GenConfig:
    n: int
    m: int
    family: Family = Family.GENERAL
    seed: int = 0
    value_range: tuple[Fraction, Fraction] = (Fraction(1), Fraction(10))
    size_range: tuple[Fraction, Fraction] = (Fraction(1, 4), Fraction(3))
    budget_range: tuple[Fraction, Fraction] = (Fraction(1), Fraction(6))
    max_denominator: int = MAX_DENOMINATOR

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        for name in ("value_range", "size_range", "budget_range"):
            lo, hi = (Fraction(x) for x in getattr(self, name))
            if lo <= 0:
                raise ValueError(f"{name} lower bound must be positive, got {lo}")
            if lo > hi:
                raise ValueError(f"{name} is empty: [{lo}, {hi}]")
            object.__setattr__(self, name, (lo, hi))
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.m < 0:
            raise ValueError("m must be nonnegative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class ScaleFactors:
    gamma_v: int
    gamma_s: int


def random_rational(rng: random.Random, lo: Fraction, hi: Fraction,
                    max_denominator: int = MAX_DENOMINATOR) -> Fraction:
    """Sample p/q in [lo, hi] with q <= max_denominator."""
    qs = [q for q in range(1, max_denominator + 1) if math.ceil(lo * q) <= math.floor(hi * q)]
    if not qs:
        raise ValueError(f"no rational with denominator <= {max_denominator} in [{lo}, {hi}]")
    q = rng.choice(qs)
    return Fraction(rng.randint(math.ceil(lo * q), math.floor(hi * q)), q)


_MAX_TRIES = 10_000


def random_instance(cfg: GenConfig) -> Instance:
    """Deterministic random instance of the configured family.

    General, equal-size and agent-specific instances are resampled until every
    agent sees pairwise-distinct densities. For proportional instances the
    shared density is drawn from ``value_range``.
    """
    rng = random.Random(cfg.seed)

    def r(bounds):
        return random_rational(rng, *bounds, cfg.max_denominator)

    budgets = tuple(r(cfg.budget_range) for _ in range(cfg.n))
    fam = cfg.family
    for _ in range(_MAX_TRIES):
        if fam is Family.AGENT_SPECIFIC:
            values = [r(cfg.value_range) for _ in range(cfg.m)]
            rows = [[r(cfg.size_range) for _ in range(cfg.m)] for _ in range(cfg.n)]
            inst = Instance.agent_specific(values, rows, budgets)
        else:
            if fam is Family.PROPORTIONAL:
                sizes = [r(cfg.size_range) for _ in range(cfg.m)]
                rho = r(cfg.value_range)
                values = [rho * s for s in sizes]
            elif fam is Family.EQUAL_SIZE:
                size = r(cfg.size_range)
                sizes = [size] * cfg.m
                values = [r(cfg.value_range) for _ in range(cfg.m)]
            elif fam is Family.CARDINALITY:
                value = r(cfg.value_range)
                values = [value] * cfg.m
                sizes = [r(cfg.size_range) for _ in range(cfg.m)]
            else:
                values = [r(cfg.value_range) for _ in range(cfg.m)]
                sizes = [r(cfg.size_range) for _ in range(cfg.m)]
            inst = Instance.common(values, sizes, budgets, fam)
        if fam in (Family.PROPORTIONAL, Family.CARDINALITY) or _all_distinct(inst):
            return inst
    raise ValueError("could not sample distinct densities; widen the ranges")


def _all_distinct(inst: Instance) -> bool:
    agents = range(inst.n) if inst.is_agent_specific else range(1)
    for a in agents:
        rhos = {density(g, a, inst) for g in range(inst.m)}
        if len(rhos) != inst.m:
            return False
    return True


def tightness_instance(eps) -> Instance:
    """Two agents with unit budgets and three goods where greedy is EF2 but not EF1.

    >>> inst = tightness_instance(Fraction(1, 10))
    >>> [str(g.value) for g in inst.goods], [str(g.sizes[0]) for g in inst.goods]
    (['10', '1/2', '4/5'], ['1/10', '1/2', '9/10'])
    """
    eps = Fraction(eps)
    if not 0 < eps < Fraction(1, 2):
        raise ValueError(f"eps must lie in (0, 1/2), got {eps}")
    half = Fraction(1, 2)
    return Instance.common(
        values=[Fraction(10), half, 1 - 2 * eps],
        sizes=[eps, half, 1 - eps],
        budgets=[Fraction(1), Fraction(1)],
    )


def integerize(inst: Instance) -> tuple[Instance, ScaleFactors]:
    """Scale values by the lcm of their denominators and sizes/budgets by theirs."""
    if inst.is_agent_specific:
        raise UnsupportedFamily("integerize only supports agent-independent sizes")
    gamma_v = math.lcm(1, *(g.value.denominator for g in inst.goods))
    gamma_s = math.lcm(1, *(g.sizes[0].denominator for g in inst.goods),
                       *(b.denominator for b in inst.budgets))
    goods = tuple(Good(g.id, g.value * gamma_v, (g.sizes[0] * gamma_s,)) for g in inst.goods)
    out = Instance(goods, tuple(b * gamma_s for b in inst.budgets), inst.family)
    return out, ScaleFactors(gamma_v, gamma_s)


def perturb_distinct(inst: Instance) -> Instance:
    """Add 1/M^g (1-based g) to each value, M = m * product of sizes.

    Sizes and budgets are untouched, so the feasible subsets do not change.
    """
    if inst.is_agent_specific:
        raise UnsupportedFamily("perturbation covers agent-independent sizes only")
    if inst.m == 0:
        return inst
    for g in inst.goods:
        if g.value.denominator != 1 or g.sizes[0].denominator != 1:
            raise MustIntegerize(f"good {g.id} has non-integer data; run integerize first")
    if any(b.denominator != 1 for b in inst.budgets):
        raise MustIntegerize("budgets must be integers; run integerize first")
    if inst.m > PERTURB_WARN_M:
        warnings.warn(f"perturbing {inst.m} goods; value bit-size grows quadratically in m",
                      stacklevel=2)
    M = inst.m * math.prod(int(g.sizes[0]) for g in inst.goods)
    goods = tuple(
        Good(g.id, g.value + Fraction(1, M ** (g.id + 1)), g.sizes) for g in inst.goods
    )
    family = inst.family
    if family in (Family.PROPORTIONAL, Family.CARDINALITY):
        family = Family.GENERAL
    out = Instance(goods, inst.budgets, family)
    if not _all_distinct(out):
        raise AssertionError("perturbation failed to separate densities")
    return out


def ef2_transfer_check(original: Instance, perturbed: Instance, alloc: Allocation) -> bool:
    """True iff "EF2 in the perturbed instance implies EF2 in the original" holds here."""
    from fairknap.verify import is_efk

    if original.n != perturbed.n or original.m != perturbed.m:
        raise MismatchedInstances("agent or good counts differ")
    if original.m:
        ratios = {p.sizes[0] / o.sizes[0] for o, p in zip(original.goods, perturbed.goods)}
        ratios |= {p / o for o, p in zip(original.budgets, perturbed.budgets)}
        if len(ratios) != 1:
            raise MismatchedInstances("sizes and budgets are not one common scaling")
    ok_perturbed, _ = is_efk(alloc, perturbed, 2)
    if not ok_perturbed:
        return True
    ok_original, _ = is_efk(alloc, original, 2)
    return ok_original


def random_feasible_allocation(inst: Instance, rng: random.Random) -> Allocation:
    """Give each good to a random agent, diverting it to charity if it would overflow."""
    bundles = [set() for _ in inst.agents]
    used = [Fraction(0)] * inst.n
    for g in range(inst.m):
        a = rng.randrange(inst.n + 1)
        if a < inst.n:
            s = inst.size(g, a)
            if used[a] + s > inst.budgets[a]:
                a = inst.n
            else:
                used[a] += s
        bundles[a].add(g)
    return Allocation(tuple(frozenset(b) for b in bundles))
