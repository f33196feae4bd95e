from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairknap.core import Allocation, Family, Instance, density, is_feasible
from fairknap.errors import ReplayDivergence, ValidationError
from fairknap.forge import GenConfig, random_instance, tightness_instance
from fairknap.greedy import CharityPolicy, EventKind, densest_greedy, replay
from fairknap.verify import prefix_size_violations, prefix_choice_violations, residual_fit_violations

F = Fraction


def bundles(result):
    return [sorted(b) for b in result.allocation.bundles]


@pytest.mark.parametrize("eps", [F(1, 10), F(1, 100)])
def test_tightness_leftover_matches_table(eps):
    res = densest_greedy(tightness_instance(eps), charity="leftover")
    assert bundles(res) == [[0, 2], [1], []]


def test_tightness_compete_gives_the_middle_good_to_charity(tight):
    # the charity sits at value 0 once agent 2 holds g2, so it takes g3 first
    res = densest_greedy(tight)
    assert bundles(res) == [[0], [1], [2]]
    assert [ev.agent for ev in res.trace] == [0, 1, 2]


def test_single_good_goes_to_first_agent():
    for n in (1, 2, 5):
        inst = Instance.common([3], [1], [1] * n)
        res = densest_greedy(inst)
        assert bundles(res) == [[0]] + [[]] * n


@pytest.mark.parametrize("policy", list(CharityPolicy))
def test_charity_picks_up_third_good(policy):
    # hand-simulated: g1 -> agent 0, g2 -> agent 1 (lowest index among zero-value
    # agents), g3 -> charity (compete: value 0 is minimal; leftover: both agents full)
    inst = Instance.common([2, 1, F(1, 2)], [1, 1, 1], [1, 1])
    assert bundles(densest_greedy(inst, policy)) == [[0], [1], [2]]


def test_exact_fit_counts():
    inst = Instance.common([1, 1], [F(1, 3), F(2, 3)], [1])
    res = densest_greedy(inst, "leftover")
    assert bundles(res) == [[0, 1], []]


def test_zero_goods():
    inst = Instance.common([], [], [1, 1])
    res = densest_greedy(inst)
    assert res.trace == () and res.sigma == ()
    assert bundles(res) == [[], [], []]
    assert replay([], inst) == res.allocation


def test_invalid_instance_rejected():
    with pytest.raises(ValidationError):
        densest_greedy(Instance.common([1, 2], [1, 1], [1], Family.CARDINALITY))


def test_trace_shape(tight):
    res = densest_greedy(tight, "leftover")
    assert [ev.step for ev in res.trace] == list(range(1, len(res.trace) + 1))
    for ev in res.trace:
        assert (ev.good is None) == (ev.kind is EventKind.DEACTIVATED)
    assert [ev.good for ev in res.trace if ev.good is not None] == list(res.sigma)
    assert sorted(res.sigma) == [0, 1, 2]
    deact = [ev for ev in res.trace if ev.kind is EventKind.DEACTIVATED]
    assert [ev.agent for ev in deact] == [1]
    assert res.trace[-1].agent_value_after == F(54, 5)


class TestReplay:
    def test_roundtrip(self, tight):
        for policy in CharityPolicy:
            res = densest_greedy(tight, policy)
            assert replay(res.trace, tight, policy) == res.allocation

    def test_good_assigned_twice(self, tight):
        res = densest_greedy(tight, "leftover")
        trace = list(res.trace)
        trace[1] = replace(trace[1], good=trace[0].good)
        with pytest.raises(ReplayDivergence) as exc:
            replay(trace, tight, "leftover")
        assert exc.value.step == 2

    def test_wrong_agent(self, tight):
        res = densest_greedy(tight)
        trace = list(res.trace)
        trace[2] = replace(trace[2], agent=0)
        with pytest.raises(ReplayDivergence) as exc:
            replay(trace, tight)
        assert exc.value.step == 3

    def test_truncated(self, tight):
        res = densest_greedy(tight)
        with pytest.raises(ReplayDivergence):
            replay(res.trace[:-1], tight)

    def test_bad_value(self, tight):
        res = densest_greedy(tight)
        trace = list(res.trace)
        trace[0] = replace(trace[0], agent_value_after=F(9))
        with pytest.raises(ReplayDivergence, match="step 1"):
            replay(trace, tight)

    def test_policy_mismatch_diverges(self, tight):
        res = densest_greedy(tight, "leftover")
        with pytest.raises(ReplayDivergence):
            replay(res.trace, tight, "compete")


families = st.sampled_from(list(Family))


@st.composite
def instances(draw, family=None):
    fam = draw(families) if family is None else family
    n = draw(st.integers(1, 4 if fam is not Family.AGENT_SPECIFIC else 3))
    m = draw(st.integers(0, 9))
    seed = draw(st.integers(0, 2**64 - 1))
    return random_instance(GenConfig(n=n, m=m, family=fam, seed=seed))


@settings(max_examples=150, deadline=None)
@given(instances(), st.sampled_from(list(CharityPolicy)))
def test_feasible_complete_deterministic(inst, policy):
    res = densest_greedy(inst, policy)
    assert is_feasible(res.allocation, inst)
    assert sorted(res.sigma) == list(range(inst.m))
    assert densest_greedy(inst, policy) == res
    assert replay(res.trace, inst, policy) == res.allocation


@settings(max_examples=150, deadline=None)
@given(instances())
def test_selection_properties(inst):
    res = densest_greedy(inst)
    assert prefix_choice_violations(res, inst) == []
    assert residual_fit_violations(res, inst) == []


@settings(max_examples=100, deadline=None)
@given(st.one_of(instances(Family.GENERAL), instances(Family.EQUAL_SIZE)))
def test_bundles_fill_in_density_order(inst):
    res = densest_greedy(inst)
    pos = {g: k for k, g in enumerate(res.sigma)}
    for a, bundle in enumerate(res.allocation.bundles):
        seq = sorted(bundle, key=pos.__getitem__)
        rhos = [density(g, a, inst) for g in seq]
        assert rhos == sorted(rhos, reverse=True)
        assert len(set(rhos)) == len(rhos)


@settings(max_examples=100, deadline=None)
@given(instances(Family.CARDINALITY))
def test_cardinality_sizes_nondecreasing(inst):
    res = densest_greedy(inst)
    sizes = [inst.size(g, 0) for g in res.sigma]
    assert sizes == sorted(sizes)
    assert prefix_size_violations(res, inst) == []


def test_leftover_charity_only_after_real_agents_stop():
    inst = random_instance(GenConfig(n=3, m=9, seed=11))
    res = densest_greedy(inst, "leftover")
    first_charity = next((k for k, ev in enumerate(res.trace) if ev.agent == inst.n), None)
    if first_charity is not None:
        deactivated = {ev.agent for ev in res.trace[:first_charity]
                       if ev.kind is EventKind.DEACTIVATED}
        assert deactivated == set(range(inst.n))


def test_allocation_type():
    res = densest_greedy(tightness_instance(F(1, 4)))
    assert isinstance(res.allocation, Allocation)
    assert res.charity is CharityPolicy.COMPETE
