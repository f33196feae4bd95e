"""Exact domain model: goods, instances, allocations and the value/size algebra.

Every quantity is a :class:`fractions.Fraction`. Agents are indexed ``0..n-1``;
index ``n`` is the charity, whose budget is :data:`INFINITE`.
"""
from __future__ import annotations

import enum
import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from fairknap.errors import InfeasibleAllocation, InvalidReference, StructuralError

Rational = Fraction


@functools.total_ordering
class _Infinite:
    """Budget of the charity agent; compares greater than every rational."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return False

    def __gt__(self, other):
        return other is not self

    def __hash__(self):
        return hash("fairknap.INFINITE")

    def __repr__(self):
        return "INFINITE"


INFINITE = _Infinite()


class Family(str, enum.Enum):
    GENERAL = "general"
    PROPORTIONAL = "proportional"
    EQUAL_SIZE = "equal_size"
    CARDINALITY = "cardinality"
    AGENT_SPECIFIC = "agent_specific"


@dataclass(frozen=True)
class Good:
    """A good with one value and either a common size or one size per real agent.

    ``sizes`` has length 1 in the common-size model and length ``n`` otherwise.
    """

    id: int
    value: Fraction
    sizes: tuple[Fraction, ...]

    @property
    def common(self) -> bool:
        return len(self.sizes) == 1


@dataclass(frozen=True)
class Instance:
    goods: tuple[Good, ...]
    budgets: tuple[Fraction, ...]
    family: Family = Family.GENERAL

    def __post_init__(self):
        object.__setattr__(self, "goods", tuple(self.goods))
        object.__setattr__(self, "budgets", tuple(Fraction(b) for b in self.budgets))
        object.__setattr__(self, "family", Family(self.family))

    @classmethod
    def common(cls, values, sizes, budgets, family=Family.GENERAL) -> "Instance":
        """Build a common-size instance from parallel value/size sequences."""
        if len(values) != len(sizes):
            raise ValueError("values and sizes must have the same length")
        goods = tuple(
            Good(g, Fraction(v), (Fraction(s),)) for g, (v, s) in enumerate(zip(values, sizes))
        )
        return cls(goods, tuple(budgets), Family(family))

    @classmethod
    def agent_specific(cls, values, agent_sizes, budgets) -> "Instance":
        """Build an instance where ``agent_sizes[a][g]`` is good g's size for agent a."""
        n = len(budgets)
        if len(agent_sizes) != n:
            raise ValueError("need one size row per agent")
        goods = []
        for g, v in enumerate(values):
            goods.append(Good(g, Fraction(v), tuple(Fraction(row[g]) for row in agent_sizes)))
        return cls(tuple(goods), tuple(budgets), Family.AGENT_SPECIFIC)

    @property
    def n(self) -> int:
        return len(self.budgets)

    @property
    def m(self) -> int:
        return len(self.goods)

    @property
    def charity(self) -> int:
        return self.n

    @property
    def agents(self) -> range:
        """All agent indices including the charity."""
        return range(self.n + 1)

    @property
    def is_agent_specific(self) -> bool:
        return any(not g.common for g in self.goods) or self.family is Family.AGENT_SPECIFIC

    def good(self, g: int) -> Good:
        if not isinstance(g, int) or not 0 <= g < self.m:
            raise InvalidReference(f"unknown good id {g!r}")
        return self.goods[g]

    def _check_agent(self, agent: int) -> None:
        if not isinstance(agent, int) or not 0 <= agent <= self.n:
            raise InvalidReference(f"unknown agent index {agent!r}")

    def value(self, g: int) -> Fraction:
        return self.good(g).value

    def size(self, g: int, agent: int) -> Fraction:
        """Size of good ``g`` under ``agent``'s size function.

        In the agent-specific model the charity sees every good with size 1.
        """
        self._check_agent(agent)
        good = self.good(g)
        if good.common:
            return good.sizes[0]
        if agent == self.n:
            return Fraction(1)
        return good.sizes[agent]

    def budget(self, agent: int):
        self._check_agent(agent)
        return INFINITE if agent == self.n else self.budgets[agent]


@dataclass(frozen=True)
class Allocation:
    """``n + 1`` bundles of good ids; the last one belongs to the charity."""

    bundles: tuple[frozenset[int], ...]

    def __post_init__(self):
        object.__setattr__(self, "bundles", tuple(frozenset(b) for b in self.bundles))

    @classmethod
    def empty(cls, inst: Instance) -> "Allocation":
        bundles = [frozenset()] * inst.n + [frozenset(range(inst.m))]
        return cls(tuple(bundles))

    @property
    def charity(self) -> frozenset[int]:
        return self.bundles[-1]

    def owner(self, g: int) -> int:
        for a, bundle in enumerate(self.bundles):
            if g in bundle:
                return a
        raise InvalidReference(f"good {g} is not allocated")


@dataclass(frozen=True)
class Violation:
    field: str
    rule: str
    detail: str = ""

    def __str__(self):
        return f"{self.field}: {self.rule}" + (f" ({self.detail})" if self.detail else "")


def bundle_value(bundle: Iterable[int], inst: Instance) -> Fraction:
    return sum((inst.value(g) for g in bundle), Fraction(0))


def bundle_size(bundle: Iterable[int], agent: int, inst: Instance) -> Fraction:
    return sum((inst.size(g, agent) for g in bundle), Fraction(0))


def density(good: int, agent: int, inst: Instance) -> Fraction:
    return inst.value(good) / inst.size(good, agent)


def validate_instance(inst: Instance) -> list[Violation]:
    """Report every broken invariant, including a declared family that does not hold."""
    out: list[Violation] = []
    if inst.n < 1:
        out.append(Violation("budgets", "agent-count", "need at least one real agent"))
    for a, b in enumerate(inst.budgets):
        if b <= 0:
            out.append(Violation(f"budgets[{a}]", "positivity", f"budget {b} is not > 0"))

    for pos, good in enumerate(inst.goods):
        where = f"goods[{pos}]"
        if good.id != pos:
            out.append(Violation(f"{where}.id", "id-order", f"expected {pos}, got {good.id}"))
        if good.value <= 0:
            out.append(Violation(f"{where}.value", "positivity", f"value {good.value} is not > 0"))
        for k, s in enumerate(good.sizes):
            if s <= 0:
                out.append(Violation(f"{where}.sizes[{k}]", "positivity", f"size {s} is not > 0"))
        if inst.family is Family.AGENT_SPECIFIC:
            if len(good.sizes) != inst.n:
                out.append(Violation(f"{where}.sizes", "shape",
                                     f"agent_specific needs {inst.n} sizes, got {len(good.sizes)}"))
        elif not good.common:
            out.append(Violation(f"{where}.sizes", "shape",
                                 f"family {inst.family.value} requires agent-independent sizes"))

    if out or not inst.goods:
        return out

    goods = inst.goods
    fam = inst.family
    if fam is Family.PROPORTIONAL:
        rho = goods[0].value / goods[0].sizes[0]
        for good in goods[1:]:
            if good.value / good.sizes[0] != rho:
                out.append(Violation(f"goods[{good.id}]", "family-mismatch",
                                     "proportional family needs one shared density"))
    elif fam is Family.EQUAL_SIZE:
        for good in goods[1:]:
            if good.sizes[0] != goods[0].sizes[0]:
                out.append(Violation(f"goods[{good.id}].size", "family-mismatch",
                                     "equal_size family needs one shared size"))
    elif fam is Family.CARDINALITY:
        for good in goods[1:]:
            if good.value != goods[0].value:
                out.append(Violation(f"goods[{good.id}].value", "family-mismatch",
                                     "cardinality family needs one shared value"))
    return out


def check_partition(alloc: Allocation, inst: Instance) -> None:
    """Raise :class:`StructuralError` unless ``alloc`` partitions the goods into n+1 bundles."""
    if len(alloc.bundles) != inst.n + 1:
        raise StructuralError(f"expected {inst.n + 1} bundles, got {len(alloc.bundles)}")
    seen: dict[int, int] = {}
    for a, bundle in enumerate(alloc.bundles):
        for g in bundle:
            if not isinstance(g, int) or not 0 <= g < inst.m:
                raise StructuralError(f"bundle {a} holds unknown good {g!r}")
            if g in seen:
                raise StructuralError(f"good {g} appears in bundles {seen[g]} and {a}")
            seen[g] = a
    missing = sorted(set(range(inst.m)) - seen.keys())
    if missing:
        raise StructuralError(f"goods {missing} are not allocated")


def is_feasible(alloc: Allocation, inst: Instance) -> bool:
    check_partition(alloc, inst)
    return all(bundle_size(alloc.bundles[a], a, inst) <= inst.budgets[a] for a in range(inst.n))


def require_feasible(alloc: Allocation, inst: Instance) -> None:
    if not is_feasible(alloc, inst):
        raise InfeasibleAllocation("some real agent exceeds its budget")


def ordered(bundle: Iterable[int], inst: Instance, agent: int = 0,
            sigma: Sequence[int] | None = None) -> list[int]:
    """Order a bundle by decreasing density under ``agent`` (ties: lower id), or by ``sigma``."""
    if sigma is not None:
        pos = {g: k for k, g in enumerate(sigma)}
        try:
            return sorted(bundle, key=pos.__getitem__)
        except KeyError as exc:
            raise InvalidReference(f"good {exc.args[0]} is missing from sigma") from None
    return sorted(bundle, key=lambda g: (-density(g, agent, inst), g))


def distinct_densities(inst: Instance, agent: int = 0) -> bool:
    rhos = [density(g, agent, inst) for g in range(inst.m)]
    return len(set(rhos)) == len(rhos)
