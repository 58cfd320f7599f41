"""Invariant suites behind ``qbmm validate``.

Each suite returns a :class:`Tally` mapping an invariant name to its pass
and fail counts. Suites are deterministic functions of their size argument.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from . import bmm as _bmm
from .graphcollision import (
    CaseTwoBoundViolation,
    all_gc,
    all_gc_envelope,
    brute_force_gc,
    has_gc,
)
from .instances import InstanceSpec, gc_random_suite, make_instance
from .oracle import QueryLedger, brute_force_product
from .search import (
    FAITHFUL,
    FORCED,
    Predicate,
    SearchConfig,
    attempt_succeeds,
    audit_declarations,
    bbht_search,
    find_max,
    grover_search,
    grover_success_probability,
    search_all,
)

SUITE_NAMES = ("primitives", "gc", "bmm", "all")
BMM_FAMILIES = ("random", "target-ell", "threshold", "single-witness")
GRID_NS = (4, 16, 64, 256)
GRID_TRIALS = 10_000
# the GC envelope is calibrated at n = 16; below that constant overheads dominate
GC_ENVELOPE_MIN_N = 16


@dataclass
class Check:
    passed: int = 0
    failed: int = 0


@dataclass
class Tally:
    checks: dict[str, Check] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def add(self, name: str, ok: bool) -> bool:
        c = self.checks.setdefault(name, Check())
        if ok:
            c.passed += 1
        else:
            c.failed += 1
        return ok

    def add_audit(self, log) -> None:
        c = self.checks.setdefault("sound_declarations", Check())
        bad = log.spurious + log.missed_forced
        c.passed += log.calls - bad
        c.failed += bad

    def merge(self, other: "Tally") -> "Tally":
        for name, c in other.checks.items():
            mine = self.checks.setdefault(name, Check())
            mine.passed += c.passed
            mine.failed += c.failed
        self.notes.extend(other.notes)
        return self

    @property
    def ok(self) -> bool:
        return all(c.failed == 0 for c in self.checks.values())

    def lines(self) -> list[str]:
        out = [f"{name:<28} pass={c.passed} fail={c.failed}" for name, c in self.checks.items()]
        return out + self.notes


def grid_points(ns=GRID_NS):
    """``(N, k, T)`` triples: k in {0, 1, N/4, N/2, N}, T in {0, 1, 2, ceil(sqrt N)}."""
    for N in ns:
        for k in sorted({0, 1, N // 4, N // 2, N}):
            for T in sorted({0, 1, 2, math.isqrt(N - 1) + 1}):
                yield N, k, T


def probability_grid(trials: int = GRID_TRIALS, seed: int = 0):
    """Per grid point ``(N, k, T, expected, observed, within_3_sigma)``."""
    rng = random.Random(seed)
    for N, k, T in grid_points():
        p = grover_success_probability(N, k, T)
        hits = sum(attempt_succeeds(N, k, T, rng) for _ in range(trials))
        freq = hits / trials
        sigma = math.sqrt(p * (1 - p) / trials)
        yield N, k, T, p, freq, abs(freq - p) <= 3 * sigma


def leaf_predicate(domain, marked, ledger: QueryLedger) -> Predicate:
    marked = frozenset(marked)

    def charged(x):
        ledger.charge(1, 0)
        return int(x in marked)

    return Predicate(domain, charged, lambda x: int(x in marked))


def _run_primitive(name, domain, marked, weights, mode, seed):
    ledger = QueryLedger()
    p = leaf_predicate(domain, marked, ledger)
    cfg = SearchConfig(mode, rng_seed=seed)
    before = ledger.total
    if name == "grover_search":
        out = grover_search(max(1, len(marked)), p, cfg, ledger)
    elif name == "bbht_search":
        out = bbht_search(1, p, cfg, ledger)
    elif name == "search_all":
        out = search_all(p, cfg, ledger)
    else:
        out = find_max(p, weights.__getitem__, cfg, ledger)
    return out, ledger.total - before


def suite_primitives(seeds: int) -> Tally:
    tally = Tally()
    for *_, ok in probability_grid():
        tally.add("probability_grid", ok)
    rng = random.Random(seeds)
    with audit_declarations() as log:
        for s in range(seeds):
            N = rng.randint(1, 64)
            domain = list(range(1, N + 1))
            tf = 0 if s % 4 == 0 else rng.randint(1, N)
            marked = set(rng.sample(domain, tf))
            weights = {x: rng.randint(0, 5) for x in domain}
            for name in ("grover_search", "bbht_search", "search_all", "find_max"):
                for mode in (FAITHFUL, FORCED):
                    out, delta = _run_primitive(name, domain, marked, weights, mode, s)
                    tally.add("charge_accounting", out.charged_queries == delta)
                    got = out.result if isinstance(out.result, frozenset) else (
                        frozenset() if out.result is None else frozenset({out.result}))
                    tally.add("membership", got <= marked)
                    if mode == FORCED:
                        again, _ = _run_primitive(name, domain, marked, weights, mode, s)
                        tally.add("forced_determinism", again.result == out.result
                                  and again.iteration_trace == out.iteration_trace)
                        if name == "search_all":
                            tally.add("search_all_complete_forced", out.result == marked)
                        if name == "find_max" and marked:
                            tally.add("find_max_exact_forced",
                                      weights[out.result] == max(weights[x] for x in marked))
    tally.add_audit(log)

    # faithful FindMax: true maximizer in at least 1 - 1/32 of 500 runs
    hits = 0
    for s in range(500):
        domain = list(range(1, 33))
        marked = set(rng.sample(domain, rng.randint(1, 32)))
        weights = {x: rng.random() for x in domain}
        out, _ = _run_primitive("find_max", domain, marked, weights, FAITHFUL, 10_000 + s)
        hits += weights[out.result] == max(weights[x] for x in marked)
    tally.add("find_max_faithful_rate", hits / 500 >= 1 - 1 / 32)
    tally.notes.append(f"find_max faithful maximizer rate {hits}/500")
    return tally


def _valid_pair(inst, i, j) -> bool:
    return bool((inst.fa_bits >> (i - 1)) & 1 and (inst.fb_bits >> (j - 1)) & 1
                and inst.graph.has_edge(i, j))


def suite_gc(seeds: int) -> Tally:
    tally = Tally()
    with audit_declarations() as log:
        for spec in gc_random_suite(seeds):
            inst = spec.build()
            truth = brute_force_gc(inst)
            for mode in (FORCED, FAITHFUL):
                cfg = SearchConfig(mode, rng_seed=spec.seed)
                ledger = QueryLedger()
                try:
                    pairs, out = all_gc(inst, cfg, ledger)
                except CaseTwoBoundViolation:
                    tally.add("case_two_bound", False)
                    continue
                if out.case == 2:
                    tally.add("case_two_bound", out.survivors <= math.ceil(math.sqrt(inst.graph.m)))
                tally.add("charge_accounting", out.charged_queries == ledger.total)
                tally.add("soundness", all(_valid_pair(inst, i, j) for i, j in pairs))
                if inst.graph.n >= GC_ENVELOPE_MIN_N:
                    tally.add("cost_envelope", out.charged_queries
                              <= all_gc_envelope(inst.graph.n, len(truth), inst.graph.m))
                if mode == FORCED:
                    tally.add("exactness_forced", pairs == truth)
                bit, hout = has_gc(inst, SearchConfig(mode, rng_seed=spec.seed), QueryLedger())
                tally.add("has_gc_sound", bit == 0 or hout.witness is not None)
                if hout.witness is not None:
                    tally.add("has_gc_witness_valid", _valid_pair(inst, *hout.witness))
                if mode == FORCED:
                    tally.add("has_gc_exact_forced", bit == int(bool(truth)))
    tally.add_audit(log)
    return tally


def bmm_suite_specs(per_cell: int, ns=(8, 16, 32), families=BMM_FAMILIES) -> list[InstanceSpec]:
    """``per_cell`` instances per (family, n) with log-uniform output targets."""
    specs = []
    for fam in families:
        for n in ns:
            rng = random.Random(f"{fam}/{n}")
            for s in range(per_cell):
                target = 0 if rng.random() < 0.1 else min(n * n, round((n * n) ** rng.random()))
                specs.append(InstanceSpec(n, fam, s, target))
    return specs


def check_bmm_run(spec: InstanceSpec, mode: str, tally: Tally, check_max_n: int = 32) -> bool:
    """One bmm run with its per-run invariants; returns output correctness."""
    A, B, ell = make_instance(spec)
    cfg = SearchConfig(mode, rng_seed=spec.seed)
    try:
        C, report = _bmm.bmm(A, B, cfg, check=spec.n <= check_max_n)
    except (_bmm.InvariantViolation, CaseTwoBoundViolation) as exc:
        tally.add("structural_invariants", False)
        tally.notes.append(f"{spec}: {exc}")
        return False
    if spec.n <= check_max_n:
        tally.add("structural_invariants", True)
    correct = C == brute_force_product(A, B)
    tally.add("sum_lambda_equals_ell", report.collisions_total == C.count_ones())
    tally.add("within_cost_bound", report.queries_total <= _bmm.cost_bound(spec.n, ell))
    for survivors, m in report.case_two_survivors:
        tally.add("case_two_bound", survivors <= math.ceil(math.sqrt(m)))
    if mode == FORCED:
        tally.add("correct_forced", correct)
    else:
        tally.add("failure_bound_below_third", report.accumulated_failure_bound < 1 / 3)
    return correct


def suite_bmm(seeds: int, ns=(8, 16, 32)) -> Tally:
    tally = Tally()
    specs = bmm_suite_specs(seeds, ns)
    with audit_declarations() as log:
        for spec in specs:
            check_bmm_run(spec, FORCED, tally)
        faithful_ok = sum(check_bmm_run(spec, FAITHFUL, tally) for spec in specs)
    tally.add_audit(log)
    tally.add("correct_faithful_rate", faithful_ok >= 0.95 * len(specs))
    tally.notes.append(f"faithful correct {faithful_ok}/{len(specs)}")
    return tally


def run_suite(name: str, seeds: int) -> Tally:
    if name not in SUITE_NAMES:
        raise ValueError(f"unknown suite {name!r}; expected one of {SUITE_NAMES}")
    if name == "primitives":
        return suite_primitives(seeds)
    if name == "gc":
        return suite_gc(seeds)
    if name == "bmm":
        return suite_bmm(seeds)
    tally = Tally()
    for part in ("primitives", "gc", "bmm"):
        tally.merge(run_suite(part, seeds))
    return tally
