"""Seeded property campaigns: generate, solve, and check with brute-force oracles.

Each trial draws from its own RNG seeded by ``(campaign seed, trial index)``,
so trials are independent and results do not depend on worker scheduling.
"""
from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

from fairknap.core import Family, Instance, bundle_size, bundle_value, is_feasible
from fairknap.errors import EnumerationLimit
from fairknap.forge import (
    GenConfig,
    ef2_transfer_check,
    integerize,
    perturb_distinct,
    random_feasible_allocation,
    random_instance,
)
from fairknap.greedy import densest_greedy, replay
from fairknap.io import allocation_to_json, instance_to_json
from fairknap.verify import (
    check_envy_transfer,
    check_lipschitz,
    ef_count,
    find_two_cut,
    is_efk,
    prefix_size_violations,
    prefix_choice_violations,
    residual_fit_violations,
    two_cut_profile,
)


@dataclass
class TrialOutcome:
    index: int
    failures: list[str] = field(default_factory=list)
    skipped: bool = False
    counterexample: dict[str, Any] | None = None
    stats: dict[str, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures and not self.skipped


@dataclass
class CampaignReport:
    suite: str
    trials: int
    seed: int
    passed: int = 0
    failed: int = 0
    skipped: int = 0
    first_failure: TrialOutcome | None = None
    stats: dict[str, int] = field(default_factory=dict)


def trial_rng(seed: int, index: int) -> random.Random:
    return random.Random(f"{seed}:{index}")


def _gen(rng: random.Random, family: Family, n_max: int, m_max: int, m_min: int = 1) -> Instance:
    cfg = GenConfig(n=rng.randint(1, n_max), m=rng.randint(m_min, m_max), family=family,
                    seed=rng.getrandbits(64))
    return random_instance(cfg)


def _example(inst, alloc=None) -> dict[str, Any]:
    doc = {"instance": instance_to_json(inst)}
    if alloc is not None:
        doc["allocation"] = allocation_to_json(alloc)
    return doc


def _solve_and_check(out: TrialOutcome, inst: Instance, k: int, *, selection: bool = False,
                     cardinality: bool = False) -> None:
    res = densest_greedy(inst)
    alloc = res.allocation
    if not is_feasible(alloc, inst):
        out.failures.append("infeasible allocation")
    if replay(res.trace, inst) != alloc:
        out.failures.append("replay mismatch")
    ok, w = is_efk(alloc, inst, k)
    if not ok:
        out.failures.append(f"not EF{k}: agent {w.envier} vs {w.envied} on {list(w.subset)} "
                            f"needs {w.efcount} removals")
    if selection:
        p1 = prefix_choice_violations(res, inst)
        p2 = residual_fit_violations(res, inst)
        out.stats["selection_checks"] = 1
        if p1:
            out.failures.append(f"prefix-choice property violated at (a,b,i,j)={p1[0]}")
        if p2:
            out.failures.append(f"residual-fit property violated at (a,b,j)={p2[0]}")
    if cardinality:
        sizes = [inst.size(g, 0) for g in res.sigma]
        if any(x > y for x, y in zip(sizes, sizes[1:])):
            out.failures.append("goods not assigned in nondecreasing size order")
        l9 = prefix_size_violations(res, inst)
        if l9:
            out.failures.append(f"prefix-size inequality violated at (a,b,i)={l9[0]}")
    if out.failures:
        out.counterexample = _example(inst, alloc)


def general_ef2_trial(rng: random.Random, out: TrialOutcome) -> None:
    inst = _gen(rng, Family.GENERAL, 4, 10)
    _solve_and_check(out, inst, 2, selection=True)


def proportional_ef1_trial(rng, out):
    _solve_and_check(out, _gen(rng, Family.PROPORTIONAL, 4, 10), 1)


def equal_size_ef1_trial(rng, out):
    _solve_and_check(out, _gen(rng, Family.EQUAL_SIZE, 4, 10), 1)


def cardinality_ef1_trial(rng, out):
    _solve_and_check(out, _gen(rng, Family.CARDINALITY, 4, 10), 1, cardinality=True)


def agent_specific_ef2_trial(rng, out):
    _solve_and_check(out, _gen(rng, Family.AGENT_SPECIFIC, 3, 8), 2, selection=True)


def _random_pair(rng: random.Random):
    """A random instance, two disjoint bundles, an agent and an ordering."""
    family = rng.choice([Family.GENERAL, Family.AGENT_SPECIFIC])
    inst = _gen(rng, family, 3, 10, m_min=2)
    goods = list(range(inst.m))
    rng.shuffle(goods)
    cut = rng.randint(0, inst.m)
    X, Y = goods[:cut], goods[cut:]
    agent = rng.randrange(inst.n + 1)
    sigma = None
    if family is Family.AGENT_SPECIFIC:
        sigma = list(range(inst.m))
        rng.shuffle(sigma)
    return inst, X, Y, agent, sigma


def lipschitz_tuple(rng: random.Random):
    while True:
        inst, X, Y, agent, sigma = _random_pair(rng)
        if Y:
            return inst, X, Y, rng.randrange(len(Y)), agent, sigma


def two_cut_tuple(rng: random.Random):
    while True:
        inst, X, Y, agent, sigma = _random_pair(rng)
        if ef_count(bundle_value(X, inst), Y, inst) >= 2:
            return inst, X, Y, agent, sigma


def check_two_cut(inst, X, Y, agent, sigma) -> str | None:
    """Return a failure description, or None when the cut satisfies both conditions."""
    t = find_two_cut(X, Y, agent, inst, sigma)
    H = two_cut_profile(X, Y, agent, inst, sigma)
    if H[t] != 2 or any(c == 2 for c in H[:t]):
        return f"cut {t} is not the first index with count 2 in {H}"
    if H[t - 1] != 1:
        return f"count before cut {t} is {H[t - 1]}, expected 1"
    return None


def envy_transfer_tuple(rng: random.Random, tries: int = 200):
    """Rejection-sample a tuple satisfying both envy-transfer hypotheses, or None."""
    for _ in range(tries):
        inst, X, Z, agent, sigma = _random_pair(rng)
        if len(Z) < 2:
            continue
        sx, sz = bundle_size(X, agent, inst), bundle_size(Z, agent, inst)
        T, T_hat = _frac_in(rng, sx), _frac_in(rng, sz)
        verdict = check_envy_transfer(X, Z, T, T_hat, agent, inst, sigma)
        if verdict is not None:
            return (inst, X, Z, T, T_hat, agent, sigma), verdict
    return None, None


def _frac_in(rng: random.Random, hi: Fraction) -> Fraction:
    return hi * Fraction(rng.randint(0, 24), 24)


def structural_oracles_trial(rng: random.Random, out: TrialOutcome) -> None:
    inst, X, Y, i, agent, sigma = lipschitz_tuple(rng)
    if not check_lipschitz(X, Y, i, agent, inst, sigma):
        out.failures.append(f"lipschitz bound fails for X={X} Y={Y} i={i} agent={agent}")
        out.counterexample = _example(inst)
        return
    inst, X, Y, agent, sigma = two_cut_tuple(rng)
    try:
        problem = check_two_cut(inst, X, Y, agent, sigma)
    except AssertionError as exc:
        problem = str(exc)
    if problem:
        out.failures.append(f"two-cut: {problem} (X={X} Y={Y} agent={agent})")
        out.counterexample = _example(inst)
        return
    tup, verdict = envy_transfer_tuple(rng)
    if tup is not None:
        out.stats["transfer_checked"] = 1
        if not verdict:
            inst, X, Z, T, T_hat, agent, sigma = tup
            out.failures.append(f"envy transfer fails X={X} Z={Z} T={T} T_hat={T_hat}")
            out.counterexample = _example(inst)


def pipeline_trial(rng: random.Random, out: TrialOutcome) -> None:
    family = rng.choice([Family.GENERAL, Family.PROPORTIONAL, Family.EQUAL_SIZE,
                         Family.CARDINALITY])
    inst = _gen(rng, family, 3, 8)
    scaled, factors = integerize(inst)
    if any(g.value.denominator != 1 or g.sizes[0].denominator != 1 for g in scaled.goods) or \
            any(b.denominator != 1 for b in scaled.budgets):
        out.failures.append("integerize left a non-integer")
    for _ in range(3):
        alloc = random_feasible_allocation(inst, rng)
        if is_feasible(alloc, inst) != is_feasible(alloc, scaled):
            out.failures.append("feasibility changed under scaling")
        for k in (0, 1, 2):
            if is_efk(alloc, inst, k)[0] != is_efk(alloc, scaled, k)[0]:
                out.failures.append(f"EF{k} verdict changed under scaling")
    perturbed = perturb_distinct(scaled)
    rhos = [g.value / g.sizes[0] for g in perturbed.goods]
    if len(set(rhos)) != len(rhos):
        out.failures.append("perturbed densities are not distinct")
    if [g.sizes for g in perturbed.goods] != [g.sizes for g in scaled.goods] or \
            perturbed.budgets != scaled.budgets:
        out.failures.append("perturbation touched sizes or budgets")
    alloc = densest_greedy(perturbed).allocation
    if not ef2_transfer_check(inst, perturbed, alloc):
        out.failures.append("EF2 in perturbed instance did not transfer to the original")
    if not is_efk(alloc, inst, 2)[0]:
        out.failures.append("solver output on perturbed instance is not EF2 in the original")
    if out.failures:
        out.counterexample = _example(inst, alloc)


SUITES: dict[str, Callable[[random.Random, TrialOutcome], None]] = {
    "theorem1": general_ef2_trial,
    "theorem2": proportional_ef1_trial,
    "theorem3": equal_size_ef1_trial,
    "theorem4": cardinality_ef1_trial,
    "theorem5": agent_specific_ef2_trial,
    "lemmas": structural_oracles_trial,
    "appendixA": pipeline_trial,
}


def run_trial(suite: str, seed: int, index: int) -> TrialOutcome:
    out = TrialOutcome(index)
    try:
        SUITES[suite](trial_rng(seed, index), out)
    except EnumerationLimit as exc:
        out.skipped = True
        out.failures = []
        out.counterexample = {"skipped": str(exc)}
    return out


def _run_star(args):
    return run_trial(*args)


def run_campaign(suite: str, trials: int, seed: int, jobs: int = 1) -> CampaignReport:
    if suite not in SUITES:
        raise KeyError(f"unknown suite {suite!r}; choose from {sorted(SUITES)}")
    jobs_args = [(suite, seed, i) for i in range(trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_star, jobs_args, chunksize=16))
    else:
        outcomes = [_run_star(a) for a in jobs_args]
    report = CampaignReport(suite, trials, seed)
    for o in outcomes:
        for key, val in o.stats.items():
            report.stats[key] = report.stats.get(key, 0) + val
        if o.skipped:
            report.skipped += 1
        elif o.failures:
            report.failed += 1
            if report.first_failure is None:
                report.first_failure = o
        else:
            report.passed += 1
    return report
