"""Command-line entry point.

Exit codes: 0 success, 1 input error, 2 enumeration cap exceeded,
3 fairness verdict negative.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from fairknap import __version__
from fairknap.campaign import SUITES, run_campaign
from fairknap.core import Family, is_feasible, validate_instance
from fairknap.errors import (
    EnumerationLimit,
    FairKnapError,
    InfeasibleAllocation,
    StructuralError,
    ValidationError,
)
from fairknap.forge import GenConfig, random_instance, tightness_instance
from fairknap.greedy import CharityPolicy, densest_greedy
from fairknap.io import (
    ParseError,
    allocation_from_json,
    allocation_to_json,
    dumps,
    instance_from_json,
    instance_to_json,
    load_json,
    parse_rational,
    trace_to_json,
    witness_to_json,
)
from fairknap.verify import all_witnesses

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CAP = 2
EXIT_UNFAIR = 3


class SolverBug(RuntimeError):
    """A solver output broke a proved guarantee."""


def _err(msg: str) -> None:
    print(f"fairknap: {msg}", file=sys.stderr)


def _load_instance(path: str):
    inst = instance_from_json(load_json(path))
    violations = validate_instance(inst)
    if violations:
        raise ValidationError(violations)
    return inst


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _verdicts(alloc, inst):
    witnesses = all_witnesses(alloc, inst)
    worst = max((w.efcount for w in witnesses), default=0)
    return witnesses, worst


def _worst_witness(witnesses):
    best = None
    for w in witnesses:
        if best is None or w.efcount > best.efcount:
            best = w
    return best


def build_report(inst, result, *, with_trace: bool, verify_k: int | None, seed=None) -> dict:
    alloc = result.allocation
    witnesses, worst = _verdicts(alloc, inst)
    report = {
        "allocation": allocation_to_json(alloc),
        "feasible": is_feasible(alloc, inst),
        "witnesses": [witness_to_json(w) for w in witnesses],
        "ef1": worst <= 1,
        "ef2": worst <= 2,
        "solver": {
            "name": "densest_greedy",
            "charity_policy": result.charity.value,
            "seed": seed,
            "version": __version__,
        },
    }
    if result.charity is CharityPolicy.COMPETE and not report["ef2"]:
        raise SolverBug(f"solver output is not EF2 (worst envy count {worst})")
    if verify_k is not None:
        report["verify_k"] = verify_k
        report["efk"] = worst <= verify_k
        w = _worst_witness(witnesses)
        report["witness"] = witness_to_json(w) if w is not None and w.efcount > verify_k else None
    if with_trace:
        report["sigma"] = list(result.sigma)
        report["trace"] = trace_to_json(result.trace)
    return report


def cmd_solve(args) -> int:
    inst = _load_instance(args.input)
    result = densest_greedy(inst, charity=args.charity)
    report = build_report(inst, result, with_trace=args.trace, verify_k=args.verify_k)
    _write(dumps(report), args.out)
    if args.verify_k is not None and not report["efk"]:
        return EXIT_UNFAIR
    return EXIT_OK


def cmd_verify(args) -> int:
    inst = _load_instance(args.instance)
    alloc = allocation_from_json(load_json(args.allocation))
    if not is_feasible(alloc, inst):
        raise InfeasibleAllocation("allocation violates a budget")
    witnesses, worst = _verdicts(alloc, inst)
    ok = worst <= args.k
    print(f"EF{args.k}: {'holds' if ok else 'fails'} (worst envy count {worst})")
    for w in witnesses:
        print(f"  {_name(w.envier, inst)} -> {_name(w.envied, inst)}: efcount {w.efcount} "
              f"subset {list(w.subset)} size {w.size_under_envier}")
    return EXIT_OK if ok else EXIT_UNFAIR


def _name(agent: int, inst) -> str:
    return "charity" if agent == inst.n else f"agent {agent}"


def cmd_gen(args) -> int:
    if args.family == "tightness":
        inst = tightness_instance(parse_rational(args.eps, "--eps"))
    else:
        cfg = GenConfig(
            n=args.n, m=args.m, family=Family(args.family), seed=args.seed,
            value_range=tuple(parse_rational(x, "--value-range") for x in args.value_range),
            size_range=tuple(parse_rational(x, "--size-range") for x in args.size_range),
            budget_range=tuple(parse_rational(x, "--budget-range") for x in args.budget_range),
        )
        inst = random_instance(cfg)
    _write(dumps(instance_to_json(inst)), args.out)
    return EXIT_OK


def cmd_campaign(args) -> int:
    report = run_campaign(args.suite, args.trials, args.seed, jobs=args.jobs)
    print(f"suite {report.suite}: {report.passed}/{report.trials} passed, "
          f"{report.failed} failed, {report.skipped} skipped (seed {report.seed})")
    for key, val in sorted(report.stats.items()):
        print(f"  {key}: {val}")
    if report.first_failure is not None:
        fail = report.first_failure
        print(json.dumps({"trial": fail.index, "failures": fail.failures,
                          "counterexample": fail.counterexample}, indent=2))
        return EXIT_UNFAIR
    if report.skipped:
        return EXIT_CAP
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors: exit 1, keeping 2 for the enumeration cap."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fairknap", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run the density-greedy solver on an instance file")
    p.add_argument("input")
    p.add_argument("--trace", action="store_true", help="include the step trace in the report")
    p.add_argument("--verify-k", type=int, default=None, metavar="K",
                   help="exit 3 if the allocation is not EF-K")
    p.add_argument("--charity", choices=[c.value for c in CharityPolicy],
                   default=CharityPolicy.COMPETE.value)
    p.add_argument("--out", default=None, help="report path (default stdout)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="certify an allocation against EF-k")
    p.add_argument("instance")
    p.add_argument("allocation")
    p.add_argument("--k", type=int, default=2)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", help="generate an instance file")
    p.add_argument("--family", default="general",
                   choices=[f.value for f in Family] + ["tightness"])
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--m", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eps", default="1/10")
    p.add_argument("--value-range", nargs=2, default=["1", "10"], metavar=("LO", "HI"))
    p.add_argument("--size-range", nargs=2, default=["1/4", "3"], metavar=("LO", "HI"))
    p.add_argument("--budget-range", nargs=2, default=["1", "6"], metavar=("LO", "HI"))
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("campaign", help="run a seeded property campaign")
    p.add_argument("--suite", required=True, choices=sorted(SUITES))
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_campaign)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EnumerationLimit as exc:
        _err(str(exc))
        return EXIT_CAP
    except (ParseError, ValidationError, StructuralError, InfeasibleAllocation) as exc:
        _err(str(exc))
        return EXIT_INPUT
    except (ValueError, OSError) as exc:
        _err(str(exc))
        return EXIT_INPUT
    except SolverBug:
        raise
    except FairKnapError as exc:
        _err(str(exc))
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
