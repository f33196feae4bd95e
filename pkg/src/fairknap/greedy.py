"""Density-greedy allocation under per-agent budgets.

The allocator handles agent-specific sizes directly; identical sizes are the
special case where every agent sees the same size function.

Charity policy
--------------
``"compete"`` (default) puts the charity in the active set from the start, on
equal footing with the real agents. This is the rule the EF2 guarantee is
proved for, and it covers envy held *by* the charity.

``"leftover"`` keeps the charity out of the active set until every real agent
is inactive, so it only receives goods no real agent can take. The classic
3-good tightness example behaves as a non-EF1 instance only under this rule.
With this policy, EF2 still holds for every real envier, but the charity may
envy a real agent by more than two goods.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from fairknap.core import Allocation, Instance, density, validate_instance
from fairknap.errors import ReplayDivergence, ValidationError


class CharityPolicy(str, enum.Enum):
    COMPETE = "compete"
    LEFTOVER = "leftover"


class EventKind(str, enum.Enum):
    ASSIGNED = "assigned"
    DEACTIVATED = "deactivated"


@dataclass(frozen=True)
class TraceEvent:
    step: int
    kind: EventKind
    agent: int
    good: int | None
    agent_value_after: Fraction


@dataclass(frozen=True)
class GreedyResult:
    allocation: Allocation
    trace: tuple[TraceEvent, ...]
    sigma: tuple[int, ...]
    charity: CharityPolicy = CharityPolicy.COMPETE


class _State:
    def __init__(self, inst: Instance, charity: CharityPolicy):
        self.inst = inst
        self.charity = charity
        n = inst.n
        self.bundles: list[list[int]] = [[] for _ in range(n + 1)]
        self.values = [Fraction(0)] * (n + 1)
        self.used = [Fraction(0)] * (n + 1)
        self.active = set(range(n + 1))
        self.remaining = set(range(inst.m))
        # charity sizes never bind; per-agent density rankings are fixed for the whole run
        self.rank = [
            sorted(range(inst.m), key=lambda g, a=a: (-density(g, a, inst), g))
            for a in range(n + 1)
        ]

    def done(self) -> bool:
        return not self.remaining

    def select_agent(self) -> int:
        candidates = self.active
        if self.charity is CharityPolicy.LEFTOVER:
            real = candidates - {self.inst.n}
            if real:
                candidates = real
        return min(candidates, key=lambda b: (self.values[b], b))

    def decide(self) -> tuple[EventKind, int, int | None]:
        a = self.select_agent()
        budget = self.inst.budget(a)
        for g in self.rank[a]:
            if g in self.remaining and self.used[a] + self.inst.size(g, a) <= budget:
                return EventKind.ASSIGNED, a, g
        return EventKind.DEACTIVATED, a, None

    def apply(self, kind: EventKind, a: int, g: int | None) -> None:
        if kind is EventKind.ASSIGNED:
            self.bundles[a].append(g)
            self.values[a] += self.inst.value(g)
            self.used[a] += self.inst.size(g, a)
            self.remaining.discard(g)
        else:
            self.active.discard(a)

    def allocation(self) -> Allocation:
        return Allocation(tuple(frozenset(b) for b in self.bundles))


def _policy(charity) -> CharityPolicy:
    return CharityPolicy(charity)


def densest_greedy(inst: Instance, charity: CharityPolicy | str = CharityPolicy.COMPETE) -> GreedyResult:
    """Allocate all goods greedily by density.

    Each round picks the active agent of least bundle value (lowest index on
    ties) and gives it the densest remaining good that still fits its residual
    budget (lowest good id on ties), or deactivates it if nothing fits.

    >>> from fairknap.forge import tightness_instance
    >>> res = densest_greedy(tightness_instance(Fraction(1, 10)), charity="leftover")
    >>> [sorted(b) for b in res.allocation.bundles]
    [[0, 2], [1], []]
    """
    violations = validate_instance(inst)
    if violations:
        raise ValidationError(violations)
    state = _State(inst, _policy(charity))
    trace: list[TraceEvent] = []
    sigma: list[int] = []
    while not state.done():
        kind, a, g = state.decide()
        state.apply(kind, a, g)
        trace.append(TraceEvent(len(trace) + 1, kind, a, g, state.values[a]))
        if g is not None:
            sigma.append(g)
    return GreedyResult(state.allocation(), tuple(trace), tuple(sigma), state.charity)


def replay(trace, inst: Instance, charity: CharityPolicy | str = CharityPolicy.COMPETE) -> Allocation:
    """Rebuild the allocation from ``trace``, checking each event against the greedy rule."""
    state = _State(inst, _policy(charity))
    for k, ev in enumerate(trace, start=1):
        if ev.step != k:
            raise ReplayDivergence(k, f"expected step ordinal {k}, got {ev.step}")
        if state.done():
            raise ReplayDivergence(k, "event after every good was allocated")
        if EventKind(ev.kind) is EventKind.ASSIGNED and ev.good is None:
            raise ReplayDivergence(k, "assigned event without a good")
        if EventKind(ev.kind) is EventKind.ASSIGNED and ev.good not in state.remaining:
            raise ReplayDivergence(k, f"good {ev.good} is not available")
        expected = state.decide()
        got = (EventKind(ev.kind), ev.agent, ev.good)
        if got != expected:
            raise ReplayDivergence(k, f"expected {expected[0].value} agent={expected[1]} "
                                      f"good={expected[2]}, trace has {got[0].value} "
                                      f"agent={got[1]} good={got[2]}")
        state.apply(*expected)
        if Fraction(ev.agent_value_after) != state.values[ev.agent]:
            raise ReplayDivergence(k, f"agent value {ev.agent_value_after} != {state.values[ev.agent]}")
    if not state.done():
        raise ReplayDivergence(len(trace) + 1, "trace ended with goods still unallocated")
    return state.allocation()
