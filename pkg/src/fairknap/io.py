"""JSON formats for instances, allocations and solver reports.

Rationals are always written as strings (``"p/q"`` or ``"p"``) so that no JSON
reader can round them.
"""
from __future__ import annotations

import json
import re
from fractions import Fraction
from typing import Any

from fairknap.core import Allocation, Family, Good, Instance
from fairknap.errors import FairKnapError

_RATIONAL = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")


class ParseError(FairKnapError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def parse_rational(text, path: str = "value") -> Fraction:
    """Parse ``"p/q"`` or ``"p"`` exactly.

    >>> parse_rational("6/4")
    Fraction(3, 2)
    """
    if isinstance(text, bool) or not isinstance(text, (str, int)):
        raise ParseError(path, f"expected a rational string, got {type(text).__name__}")
    match = _RATIONAL.match(str(text))
    if not match:
        raise ParseError(path, f"malformed rational {text!r}")
    num, den = match.groups()
    if den is not None and int(den) == 0:
        raise ParseError(path, f"zero denominator in {text!r}")
    return Fraction(int(num), int(den) if den else 1)


def format_rational(x: Fraction) -> str:
    return str(Fraction(x))


def instance_to_json(inst: Instance) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "n": inst.n,
        "budgets": [format_rational(b) for b in inst.budgets],
        "family": inst.family.value,
    }
    if inst.is_agent_specific:
        doc["goods"] = [{"id": g.id, "value": format_rational(g.value)} for g in inst.goods]
        doc["agent_sizes"] = [
            [format_rational(g.sizes[a]) for g in inst.goods] for a in range(inst.n)
        ]
    else:
        doc["goods"] = [
            {"id": g.id, "value": format_rational(g.value), "size": format_rational(g.sizes[0])}
            for g in inst.goods
        ]
    return doc


def _expect(cond: bool, path: str, message: str) -> None:
    if not cond:
        raise ParseError(path, message)


def instance_from_json(doc: Any) -> Instance:
    _expect(isinstance(doc, dict), "$", "instance must be a JSON object")
    n = doc.get("n")
    _expect(isinstance(n, int) and not isinstance(n, bool) and n >= 1, "$.n",
            "must be an integer >= 1")
    budgets = doc.get("budgets")
    _expect(isinstance(budgets, list) and len(budgets) == n, "$.budgets",
            f"must be a list of {n} rational strings")
    budgets = [parse_rational(b, f"$.budgets[{a}]") for a, b in enumerate(budgets)]

    family_raw = doc.get("family")
    agent_sizes = doc.get("agent_sizes")
    if family_raw is None:
        family = Family.AGENT_SPECIFIC if agent_sizes is not None else Family.GENERAL
    else:
        try:
            family = Family(family_raw)
        except ValueError:
            raise ParseError("$.family", f"unknown family {family_raw!r}") from None
    _expect((agent_sizes is not None) == (family is Family.AGENT_SPECIFIC), "$.agent_sizes",
            "present if and only if family is agent_specific")

    goods_raw = doc.get("goods")
    _expect(isinstance(goods_raw, list), "$.goods", "must be a list")
    m = len(goods_raw)
    if agent_sizes is not None:
        _expect(isinstance(agent_sizes, list) and len(agent_sizes) == n, "$.agent_sizes",
                f"must have one row per agent ({n})")
        rows = []
        for a, row in enumerate(agent_sizes):
            _expect(isinstance(row, list) and len(row) == m, f"$.agent_sizes[{a}]",
                    f"must list {m} sizes")
            rows.append([parse_rational(s, f"$.agent_sizes[{a}][{g}]") for g, s in enumerate(row)])

    goods = []
    for pos, raw in enumerate(goods_raw):
        where = f"$.goods[{pos}]"
        _expect(isinstance(raw, dict), where, "must be an object")
        _expect(raw.get("id") == pos, f"{where}.id", f"expected id {pos}")
        value = parse_rational(raw.get("value"), f"{where}.value")
        if agent_sizes is None:
            _expect("size" in raw, f"{where}.size", "missing")
            sizes = (parse_rational(raw["size"], f"{where}.size"),)
        else:
            _expect("size" not in raw, f"{where}.size", "must be omitted with agent_sizes")
            sizes = tuple(rows[a][pos] for a in range(n))
        goods.append(Good(pos, value, sizes))
    return Instance(tuple(goods), tuple(budgets), family)


def allocation_to_json(alloc: Allocation) -> dict[str, Any]:
    return {
        "bundles": [sorted(b) for b in alloc.bundles[:-1]],
        "charity": sorted(alloc.charity),
    }


def allocation_from_json(doc: Any) -> Allocation:
    """Accept a bare allocation object or a full report holding one under ``allocation``."""
    if isinstance(doc, dict) and "allocation" in doc:
        doc = doc["allocation"]
    _expect(isinstance(doc, dict), "$", "allocation must be an object")
    bundles = doc.get("bundles")
    charity = doc.get("charity")
    _expect(isinstance(bundles, list), "$.bundles", "must be a list of id lists")
    _expect(isinstance(charity, list), "$.charity", "must be a list of ids")
    out = []
    for a, bundle in enumerate([*bundles, charity]):
        where = f"$.bundles[{a}]" if a < len(bundles) else "$.charity"
        _expect(isinstance(bundle, list), where, "must be a list")
        for g in bundle:
            _expect(isinstance(g, int) and not isinstance(g, bool), where, f"bad good id {g!r}")
        _expect(len(set(bundle)) == len(bundle), where, "duplicate good id")
        out.append(frozenset(bundle))
    return Allocation(tuple(out))


def witness_to_json(w) -> dict[str, Any]:
    return {
        "envier": w.envier,
        "envied": w.envied,
        "subset": list(w.subset),
        "size_under_envier": format_rational(w.size_under_envier),
        "efcount": w.efcount,
    }


def trace_to_json(trace) -> list[dict[str, Any]]:
    return [
        {
            "step": ev.step,
            "kind": ev.kind.value,
            "agent": ev.agent,
            "good": ev.good,
            "agent_value_after": format_rational(ev.agent_value_after),
        }
        for ev in trace
    ]


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=2) + "\n"


def load_json(path: str) -> Any:
    """Read a JSON file, turning decode errors into a ParseError naming the line."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from None
