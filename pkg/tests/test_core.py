from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairknap.core import (
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
from fairknap.errors import InvalidReference, StructuralError

F = Fraction


def test_infinite_beats_every_rational():
    assert INFINITE > F(10**30)
    assert F(10**30) < INFINITE
    assert F(7) <= INFINITE
    assert not INFINITE < F(1)
    assert INFINITE == INFINITE


class TestBundleValue:
    def test_empty(self, tight):
        assert bundle_value([], tight) == 0

    def test_singleton(self, tight):
        assert bundle_value({0}, tight) == 10

    def test_tightness_pair(self, tight):
        assert bundle_value({0, 2}, tight) == F(54, 5)

    def test_unknown_id(self, tight):
        with pytest.raises(InvalidReference):
            bundle_value({7}, tight)


class TestBundleSize:
    def test_empty(self, tight):
        assert bundle_size([], 0, tight) == 0

    def test_tightness_pair(self, tight):
        assert bundle_size({0, 2}, 0, tight) == 1

    def test_agent_specific_lookup(self):
        inst = Instance.agent_specific([5], [[2], [3]], [10, 10])
        assert bundle_size({0}, 1, inst) == 3
        assert bundle_size({0}, 0, inst) == 2

    def test_charity_sees_unit_sizes_when_agent_specific(self):
        inst = Instance.agent_specific([5, 1], [[2, 7], [3, 9]], [10, 10])
        assert bundle_size({0, 1}, 2, inst) == 2

    def test_invalid_agent(self, tight):
        with pytest.raises(InvalidReference):
            bundle_size({0}, 3, tight)


class TestDensity:
    def test_dense_tiny_good(self, tight):
        assert density(0, 0, tight) == 100

    def test_proportional_is_one(self):
        inst = Instance.common([F(3, 7)], [F(3, 7)], [1])
        assert density(0, 0, inst) == 1

    def test_agent_specific(self):
        inst = Instance.agent_specific([3], [[1], [2]], [5, 5])
        assert density(0, 1, inst) == F(3, 2)


class TestValidate:
    def test_well_formed(self, tight):
        assert validate_instance(tight) == []

    def test_cardinality_mismatch(self):
        inst = Instance.common([1, 2], [1, 1], [3], Family.CARDINALITY)
        rules = [v.rule for v in validate_instance(inst)]
        assert rules == ["family-mismatch"]

    def test_zero_size(self):
        inst = Instance.common([1], [0], [3])
        rules = [v.rule for v in validate_instance(inst)]
        assert rules == ["positivity"]

    @pytest.mark.parametrize("family,values,sizes", [
        (Family.PROPORTIONAL, [1, 2], [1, 1]),
        (Family.EQUAL_SIZE, [1, 2], [1, 2]),
    ])
    def test_other_family_mismatches(self, family, values, sizes):
        inst = Instance.common(values, sizes, [3], family)
        assert any(v.rule == "family-mismatch" for v in validate_instance(inst))

    def test_declared_families_that_hold(self):
        assert validate_instance(Instance.common([2, 4], [1, 2], [3], Family.PROPORTIONAL)) == []
        assert validate_instance(Instance.common([2, 4], [1, 1], [3], Family.EQUAL_SIZE)) == []
        assert validate_instance(Instance.common([2, 2], [1, 5], [3], Family.CARDINALITY)) == []

    def test_agent_specific_sizes_need_the_flag(self):
        goods = (Good(0, F(1), (F(1), F(2))),)
        inst = Instance(goods, (F(1), F(1)), Family.GENERAL)
        assert [v.rule for v in validate_instance(inst)] == ["shape"]

    def test_bad_ids_and_budgets(self):
        goods = (Good(3, F(1), (F(1),)),)
        inst = Instance(goods, (F(0),))
        rules = sorted(v.rule for v in validate_instance(inst))
        assert rules == ["id-order", "positivity"]

    def test_empty_instance_is_legal(self):
        assert validate_instance(Instance.common([], [], [1])) == []


class TestFeasibility:
    def test_everything_to_charity(self, tight):
        assert is_feasible(Allocation.empty(tight), tight)

    def test_tightness_output(self, tight, tight_alloc):
        assert is_feasible(tight_alloc, tight)

    def test_over_budget(self):
        inst = Instance.common([1, 1], [1, 1], [1])
        assert not is_feasible(Allocation(({0, 1}, set())), inst)

    def test_non_partition(self, tight):
        with pytest.raises(StructuralError):
            is_feasible(Allocation(({0}, {0, 1}, {2})), tight)
        with pytest.raises(StructuralError):
            is_feasible(Allocation(({0}, {1}, set())), tight)
        with pytest.raises(StructuralError):
            is_feasible(Allocation(({0, 1, 2}, set())), tight)

    def test_zero_goods(self):
        inst = Instance.common([], [], [1, 2])
        assert is_feasible(Allocation((set(), set(), set())), inst)


rationals = st.fractions(min_value=-50, max_value=50, max_denominator=30)
positive = st.fractions(min_value=F(1, 30), max_value=20, max_denominator=30)


@given(st.lists(rationals, min_size=1, max_size=8), st.randoms(use_true_random=False), rationals)
def test_evaluation_order_does_not_matter(xs, rnd, c):
    ys = list(xs)
    rnd.shuffle(ys)
    assert sum(xs, F(0)) == sum(ys, F(0))
    assert c * sum(xs, F(0)) == sum((c * x for x in ys), F(0))
    if all(x != 0 for x in xs):
        prod = F(1)
        for x in xs:
            prod *= x
        for y in ys:
            prod /= y
        assert prod == 1


@settings(max_examples=60)
@given(st.lists(st.tuples(positive, positive), min_size=0, max_size=8), st.data())
def test_value_and_size_are_additive(goods, data):
    inst = Instance.common([v for v, _ in goods], [s for _, s in goods], [1])
    ids = list(range(len(goods)))
    S = set(data.draw(st.lists(st.sampled_from(ids), unique=True)) if ids else [])
    T = set(ids) - S
    assert bundle_value(S | T, inst) == bundle_value(S, inst) + bundle_value(T, inst)
    assert bundle_size(S | T, 0, inst) == bundle_size(S, 0, inst) + bundle_size(T, 0, inst)


@given(st.lists(st.tuples(positive, positive), max_size=6),
       st.lists(positive, min_size=1, max_size=3))
def test_all_empty_real_bundles_are_feasible(goods, budgets):
    inst = Instance.common([v for v, _ in goods], [s for _, s in goods], budgets)
    assert is_feasible(Allocation.empty(inst), inst)
