"""Envy counting, exhaustive EFk certification and structural oracles.

EFCount(x, Y) is the least number of goods to drop from Y so that what is
left is worth at most x. Because valuations are additive, dropping the most
valuable goods first is optimal; :func:`ef_count_bruteforce` is the
independent exhaustive check.
"""
from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from fairknap.core import (
    INFINITE,
    Allocation,
    Instance,
    bundle_size,
    bundle_value,
    check_partition,
    density,
    ordered,
    require_feasible,
)
from fairknap.errors import EnumerationLimit, InvalidReference, NoCutError

DEFAULT_MAX_ENUM = 20


def max_enum() -> int:
    """Enumeration cap per bundle; ``FAIRKNAP_MAX_ENUM`` overrides the default of 20."""
    raw = os.environ.get("FAIRKNAP_MAX_ENUM")
    return int(raw) if raw else DEFAULT_MAX_ENUM


def _check_cap(size: int) -> None:
    cap = max_enum()
    if size > cap:
        raise EnumerationLimit(f"bundle of {size} goods exceeds enumeration cap {cap}")


# ---------------------------------------------------------------------------
# EFCount over whole goods


def _count_from_values(x_value: Fraction, values: Iterable[Fraction]) -> int:
    vals = sorted(values, reverse=True)
    rest = sum(vals, Fraction(0))
    k = 0
    while rest > x_value:
        rest -= vals[k]
        k += 1
    return k


def ef_count(x_value, y: Iterable[int], inst: Instance) -> int:
    return _count_from_values(Fraction(x_value), (inst.value(g) for g in y))


def _bruteforce_from_values(x_value: Fraction, values: Sequence[Fraction]) -> int:
    total = sum(values, Fraction(0))
    idx = range(len(values))
    for k in range(len(values) + 1):
        for removed in itertools.combinations(idx, k):
            if total - sum((values[i] for i in removed), Fraction(0)) <= x_value:
                return k
    raise AssertionError("unreachable: removing everything leaves value 0")


def ef_count_bruteforce(x_value, y: Iterable[int], inst: Instance) -> int:
    """Exhaustive EFCount over every removal set; the reference for :func:`ef_count`."""
    y = list(y)
    _check_cap(len(y))
    return _bruteforce_from_values(Fraction(x_value), [inst.value(g) for g in y])


# ---------------------------------------------------------------------------
# Witness search and EFk


@dataclass(frozen=True)
class EnvyWitness:
    envier: int
    envied: int
    subset: tuple[int, ...]
    size_under_envier: Fraction
    efcount: int


def worst_witness(alloc: Allocation, inst: Instance, a: int, b: int) -> EnvyWitness:
    """Worst budget-feasible subset of b's bundle from a's point of view.

    Enumerates every F in A_b with s_a(F) <= B_a and returns one maximising
    EFCount(v(A_a), F), breaking ties by the lexicographically smallest sorted
    id tuple.
    """
    if not (0 <= a <= inst.n and 0 <= b <= inst.n):
        raise InvalidReference(f"agent pair ({a}, {b}) out of range")
    goods = sorted(alloc.bundles[b])
    _check_cap(len(goods))
    x = bundle_value(alloc.bundles[a], inst)
    budget = inst.budget(a)
    if bundle_value(goods, inst) <= x:
        return EnvyWitness(a, b, (), Fraction(0), 0)

    sizes = [inst.size(g, a) for g in goods]
    values = [inst.value(g) for g in goods]
    best: tuple[int, tuple[int, ...], Fraction] = (0, (), Fraction(0))
    k = len(goods)
    # subset sums by lowest set bit; masks are visited in increasing order
    size_of = [Fraction(0)] * (1 << k)
    for mask in range(1, 1 << k):
        low = (mask & -mask).bit_length() - 1
        size_of[mask] = size_of[mask & (mask - 1)] + sizes[low]
        if budget is not INFINITE and size_of[mask] > budget:
            continue
        members = [i for i in range(k) if mask >> i & 1]
        count = _count_from_values(x, (values[i] for i in members))
        subset = tuple(goods[i] for i in members)
        if count > best[0] or (count == best[0] and count > 0 and subset < best[1]):
            best = (count, subset, size_of[mask])
    return EnvyWitness(a, b, best[1], best[2], best[0])


def all_witnesses(alloc: Allocation, inst: Instance) -> list[EnvyWitness]:
    check_partition(alloc, inst)
    return [worst_witness(alloc, inst, a, b) for a in inst.agents for b in inst.agents]


def is_efk(alloc: Allocation, inst: Instance, k: int) -> tuple[bool, EnvyWitness | None]:
    """Exact EFk check over all ordered agent pairs, charity included on both sides.

    Returns ``(True, None)`` or ``(False, w)`` where ``w`` has the largest
    envy count found (first such pair in row-major order).
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    check_partition(alloc, inst)
    require_feasible(alloc, inst)
    worst = None
    for a in inst.agents:
        for b in inst.agents:
            w = worst_witness(alloc, inst, a, b)
            if w.efcount > k and (worst is None or w.efcount > worst.efcount):
                worst = w
    return worst is None, worst


# ---------------------------------------------------------------------------
# Prefix subsets


@dataclass(frozen=True)
class FractionalBundle:
    """Ordered ``(good, fraction)`` parts; at most one fraction lies strictly in (0, 1)."""

    parts: tuple[tuple[int, Fraction], ...] = ()

    def __post_init__(self):
        parts = tuple((g, Fraction(f)) for g, f in self.parts if f != 0)
        for _, f in parts:
            if not 0 < f <= 1:
                raise ValueError(f"fraction {f} outside [0, 1]")
        if sum(1 for _, f in parts if f < 1) > 1:
            raise ValueError("at most one part may be fractional")
        object.__setattr__(self, "parts", parts)

    @classmethod
    def whole(cls, goods: Iterable[int]) -> "FractionalBundle":
        return cls(tuple((g, Fraction(1)) for g in goods))

    def part_values(self, inst: Instance) -> list[Fraction]:
        return [f * inst.value(g) for g, f in self.parts]

    def value(self, inst: Instance) -> Fraction:
        return sum(self.part_values(inst), Fraction(0))

    def size(self, inst: Instance, agent: int) -> Fraction:
        return sum((f * inst.size(g, agent) for g, f in self.parts), Fraction(0))

    @property
    def fractional_count(self) -> int:
        return sum(1 for _, f in self.parts if f < 1)


def prefix_by_count(bundle: Iterable[int], i: int, inst: Instance, agent: int = 0,
                    sigma: Sequence[int] | None = None) -> tuple[int, ...]:
    """The first ``i`` goods of ``bundle`` by decreasing density (or by ``sigma``)."""
    goods = ordered(bundle, inst, agent, sigma)
    if not 0 <= i <= len(goods):
        raise IndexError(f"prefix length {i} outside [0, {len(goods)}]")
    return tuple(goods[:i])


def prefix_by_size(bundle: Iterable[int], B, inst: Instance, agent: int = 0,
                   sigma: Sequence[int] | None = None) -> FractionalBundle:
    """Densest-first prefix of total size exactly ``min(B, s_agent(bundle))``.

    >>> inst = Instance.common([4, 3], [2, 3], [10])
    >>> prefix_by_size({0, 1}, 3, inst).parts
    ((0, Fraction(1, 1)), (1, Fraction(1, 3)))
    """
    B = Fraction(B)
    if B < 0:
        raise ValueError(f"threshold {B} is negative")
    goods = ordered(bundle, inst, agent, sigma)
    parts: list[tuple[int, Fraction]] = []
    used = Fraction(0)
    for g in goods:
        s = inst.size(g, agent)
        if used + s <= B:
            parts.append((g, Fraction(1)))
            used += s
        else:
            parts.append((g, (B - used) / s))
            break
    return FractionalBundle(tuple(parts))


def _value_of(x, inst: Instance) -> Fraction:
    return x.value(inst) if isinstance(x, FractionalBundle) else Fraction(x)


def ef_count_fractional(x, y: FractionalBundle, inst: Instance) -> int:
    """EFCount where each part of ``y`` (fractional or not) counts as one removable good.

    ``x`` may be a :class:`FractionalBundle` or a plain value.
    """
    return _count_from_values(_value_of(x, inst), y.part_values(inst))


def ef_count_fractional_bruteforce(x, y: FractionalBundle, inst: Instance) -> int:
    _check_cap(len(y.parts))
    return _bruteforce_from_values(_value_of(x, inst), y.part_values(inst))


# ---------------------------------------------------------------------------
# Oracles for the structural envy bounds


def _prefix_sizes(Y, inst, agent, sigma) -> list[Fraction]:
    goods = ordered(Y, inst, agent, sigma)
    out = [Fraction(0)]
    for g in goods:
        out.append(out[-1] + inst.size(g, agent))
    return out


def _count_at(X, Y, T, inst, agent, sigma) -> int:
    return ef_count_fractional(prefix_by_size(X, T, inst, agent, sigma),
                               prefix_by_size(Y, T, inst, agent, sigma), inst)


def check_lipschitz(X, Y, i: int, agent: int, inst: Instance,
                    sigma: Sequence[int] | None = None) -> bool:
    """Adding the (i+1)-th good of Y to both thresholds raises the envy count by at most one."""
    Y = list(Y)
    if not 0 <= i < len(Y):
        raise IndexError(f"index {i} outside [0, {len(Y)})")
    h = _prefix_sizes(Y, inst, agent, sigma)
    before = _count_at(X, Y, h[i], inst, agent, sigma)
    after = _count_at(X, Y, h[i + 1], inst, agent, sigma)
    return after <= before + 1


def two_cut_profile(X, Y, agent: int, inst: Instance,
                    sigma: Sequence[int] | None = None) -> list[int]:
    """Envy counts H(t) for t = 0..|Y| at thresholds h(t) = size of the first t goods of Y."""
    h = _prefix_sizes(Y, inst, agent, sigma)
    return [_count_at(X, Y, T, inst, agent, sigma) for T in h]


def find_two_cut(X, Y, agent: int, inst: Instance,
                 sigma: Sequence[int] | None = None) -> int:
    """Smallest t with H(t) = 2; H(t-1) is then exactly 1."""
    X, Y = list(X), list(Y)
    if ef_count(bundle_value(X, inst), Y, inst) < 2:
        raise NoCutError("envy count of X towards Y is below two")
    H = two_cut_profile(X, Y, agent, inst, sigma)
    t = next((t for t, c in enumerate(H) if c == 2), None)
    if t is None:
        raise AssertionError(f"no index with envy count 2 in profile {H}")
    if t < 1 or H[t - 1] != 1:
        raise AssertionError(f"count before the cut is {H[t - 1] if t else None}, expected 1")
    return t


def check_envy_transfer(X, Z, T, T_hat, agent: int, inst: Instance,
                        sigma: Sequence[int] | None = None) -> bool | None:
    """Envy-transfer oracle.

    If EFCount(X^[T], Z^[T_hat]) = 2 and the value of X beyond X^[T] is at
    least the value of Z beyond Z^[T_hat], then EFCount(X, Z) <= 2. Returns
    ``None`` when the hypotheses do not hold, otherwise whether the conclusion does.
    """
    Xp = prefix_by_size(X, T, inst, agent, sigma)
    Zp = prefix_by_size(Z, T_hat, inst, agent, sigma)
    if ef_count_fractional(Xp, Zp, inst) != 2:
        return None
    vx, vz = bundle_value(X, inst), bundle_value(Z, inst)
    if vx - Xp.value(inst) < vz - Zp.value(inst):
        return None
    return ef_count(vx, Z, inst) <= 2


def _rank(g: int, agent: int, inst: Instance):
    return density(g, agent, inst), -g


def prefix_choice_violations(result, inst: Instance) -> list[tuple[int, int, int, int]]:
    """Index tuples (a, b, i, j) where the greedy selection property fails.

    For bundles ordered by allocation: if v(A_a^(i)) < v(A_b^(j)) and
    h_{j+1} fits on top of A_a^(i) for agent a, then a's (i+1)-th good must
    rank above h_{j+1} under rho_a (lower id wins exact density ties).
    """
    sigma = result.sigma
    bundles = [ordered(b, inst, sigma=sigma) for b in result.allocation.bundles]
    out = []
    for a in inst.agents:
        A = bundles[a]
        budget = inst.budget(a)
        pv_a = _prefix_values(A, inst)
        ps_a = _prefix_sizes_list(A, a, inst)
        for b in inst.agents:
            Bb = bundles[b]
            pv_b = _prefix_values(Bb, inst)
            for i in range(len(A)):
                for j in range(len(Bb)):
                    if a == b and i == j:
                        continue
                    h = Bb[j]
                    if pv_a[i] < pv_b[j] and ps_a[i] + inst.size(h, a) <= budget:
                        if not _rank(A[i], a, inst) > _rank(h, a, inst):
                            out.append((a, b, i, j))
    return out


def residual_fit_violations(result, inst: Instance) -> list[tuple[int, int, int]]:
    """Index triples (a, b, j) with s_a(A_a + h_{j+1}) <= B_a but v(A_a) < v(A_b^(j))."""
    sigma = result.sigma
    bundles = [ordered(b, inst, sigma=sigma) for b in result.allocation.bundles]
    out = []
    for a in inst.agents:
        va = bundle_value(bundles[a], inst)
        sa = bundle_size(bundles[a], a, inst)
        budget = inst.budget(a)
        for b in inst.agents:
            if a == b:
                continue
            Bb = bundles[b]
            pv_b = _prefix_values(Bb, inst)
            for j in range(len(Bb)):
                if sa + inst.size(Bb[j], a) <= budget and va < pv_b[j]:
                    out.append((a, b, j))
    return out


def prefix_size_violations(result, inst: Instance) -> list[tuple[int, int, int]]:
    """Triples (a, b, i) with s(A_a^(i)) > s(A_b^(i+1)), i <= min(|A_a|, |A_b| - 1).

    Meaningful for cardinality instances (all values equal).
    """
    sigma = result.sigma
    bundles = [ordered(b, inst, sigma=sigma) for b in result.allocation.bundles]
    out = []
    for a in inst.agents:
        ps_a = _prefix_sizes_list(bundles[a], a, inst)
        for b in inst.agents:
            ps_b = _prefix_sizes_list(bundles[b], a, inst)
            for i in range(1, min(len(bundles[a]), len(bundles[b]) - 1) + 1):
                if ps_a[i] > ps_b[i + 1]:
                    out.append((a, b, i))
    return out


def _prefix_values(goods, inst) -> list[Fraction]:
    out = [Fraction(0)]
    for g in goods:
        out.append(out[-1] + inst.value(g))
    return out


def _prefix_sizes_list(goods, agent, inst) -> list[Fraction]:
    out = [Fraction(0)]
    for g in goods:
        out.append(out[-1] + inst.size(g, agent))
    return out
