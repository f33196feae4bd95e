import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairknap.core import Allocation, Family
from fairknap.forge import GenConfig, random_instance
from fairknap.io import (
    ParseError,
    allocation_from_json,
    allocation_to_json,
    dumps,
    instance_from_json,
    instance_to_json,
    load_json,
    parse_rational,
)

F = Fraction


@pytest.mark.parametrize("text,expected", [
    ("3", F(3)), ("6/4", F(3, 2)), ("-1/3", F(-1, 3)), (" 7 / 2 ", F(7, 2)), (5, F(5)),
])
def test_parse_rational(text, expected):
    assert parse_rational(text) == expected


@pytest.mark.parametrize("text", ["1/0", "abc", "1.5", "", "1/-2", None, True, 0.5])
def test_parse_rational_rejects(text):
    with pytest.raises(ParseError):
        parse_rational(text, "$.x")


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(list(Family)), st.integers(1, 3), st.integers(0, 6),
       st.integers(0, 2**64 - 1))
def test_instance_roundtrip(fam, n, m, seed):
    inst = random_instance(GenConfig(n=n, m=m, family=fam, seed=seed))
    doc = json.loads(dumps(instance_to_json(inst)))
    assert instance_from_json(doc) == inst


def test_allocation_roundtrip(tight_alloc):
    doc = allocation_to_json(tight_alloc)
    assert doc == {"bundles": [[0, 2], [1]], "charity": []}
    assert allocation_from_json(doc) == tight_alloc
    assert allocation_from_json({"allocation": doc, "feasible": True}) == tight_alloc


def _doc():
    return {"n": 1, "budgets": ["2"], "family": "general",
            "goods": [{"id": 0, "value": "1", "size": "1/2"}]}


class TestInstanceErrors:
    def test_error_path_points_at_field(self):
        doc = _doc()
        doc["goods"][0]["value"] = "x"
        with pytest.raises(ParseError) as exc:
            instance_from_json(doc)
        assert exc.value.path == "$.goods[0].value"

    def test_agent_sizes_without_family(self):
        doc = _doc()
        doc["agent_sizes"] = [["1"]]
        with pytest.raises(ParseError, match="agent_sizes"):
            instance_from_json(doc)

    def test_agent_specific_needs_sizes(self):
        doc = _doc()
        doc["family"] = "agent_specific"
        with pytest.raises(ParseError, match="agent_sizes"):
            instance_from_json(doc)

    def test_agent_specific_ok(self):
        doc = {"n": 2, "budgets": ["1", "1"], "family": "agent_specific",
               "goods": [{"id": 0, "value": "3"}], "agent_sizes": [["1"], ["1/2"]]}
        inst = instance_from_json(doc)
        assert inst.size(0, 1) == F(1, 2) and inst.size(0, 2) == 1

    def test_wrong_budget_count(self):
        doc = _doc()
        doc["budgets"] = ["1", "2"]
        with pytest.raises(ParseError):
            instance_from_json(doc)

    def test_unknown_family(self):
        doc = _doc()
        doc["family"] = "weird"
        with pytest.raises(ParseError):
            instance_from_json(doc)


def test_allocation_duplicates_rejected():
    with pytest.raises(ParseError):
        allocation_from_json({"bundles": [[0, 0]], "charity": []})


def test_load_json_reports_position(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "n": 1,\n}')
    with pytest.raises(ParseError, match=r"bad.json:3"):
        load_json(str(p))


def test_empty_allocation_json():
    alloc = Allocation((frozenset(), frozenset({0})))
    assert allocation_to_json(alloc) == {"bundles": [[]], "charity": [0]}
