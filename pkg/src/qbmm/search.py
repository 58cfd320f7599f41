"""Classical simulations of the amplitude-amplification search primitives.

Each primitive samples its outcome from the closed-form success probability
of Grover iterations started from the uniform superposition, and charges the
ledger for every oracle call the quantum routine would make. Which elements
are marked is determined omnisciently through ``Predicate.ideal_eval``;
that bookkeeping is never charged.

Two modes are supported:

``faithful``
    outcomes are sampled, with ``ceil(c_rep * log2(N + 2))`` repetitions
    used to boost the success probability.
``forced``
    every primitive behaves as its zero-error idealization. The charging
    schedule is the same as in faithful mode, but the first repetition
    succeeds whenever a marked element exists.
"""

from __future__ import annotations

import dataclasses
import functools
import math
import random
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Callable, NamedTuple, Sequence

from .oracle import QueryLedger

FAITHFUL = "faithful"
FORCED = "forced"
MODES = (FAITHFUL, FORCED)


@dataclass
class SearchConfig:
    mode: str = FAITHFUL
    c_rep: float = 3.0
    rng_seed: int = 0
    failure_target_exponent: float = 2.0
    rng: random.Random = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.c_rep < 1:
            raise ValueError(f"c_rep must be >= 1, got {self.c_rep}")
        if self.failure_target_exponent <= 0:
            raise ValueError("failure_target_exponent must be positive")
        self.rng = random.Random(self.rng_seed)

    @property
    def forced(self) -> bool:
        return self.mode == FORCED

    def repetitions(self, N: int) -> int:
        return math.ceil(self.c_rep * math.log2(N + 2))


@dataclass
class Predicate:
    """A searchable domain with a charged and an uncharged evaluator.

    ``marked_fn``, when given, computes the ideal marked subset of a domain
    in bulk; it must agree with filtering the domain by ``ideal_eval``.
    """

    domain: Sequence[int]
    charged_eval: Callable[[int], int]
    ideal_eval: Callable[[int], int]
    declared_cost: int = 1
    marked_fn: Callable[[Sequence[int]], list[int]] | None = None

    def marked(self) -> list[int]:
        if self.marked_fn is not None:
            return self.marked_fn(self.domain)
        return [x for x in self.domain if self.ideal_eval(x)]

    def restrict(self, domain: Sequence[int]) -> "Predicate":
        return dataclasses.replace(self, domain=domain)


class Repetition(NamedTuple):
    iterations: int
    success: bool
    queries: int


@dataclass
class PrimitiveOutcome:
    result: Any = None
    charged_queries: int = 0
    failure_probability_bound: float = 0.0
    iteration_trace: list[Repetition] = field(default_factory=list)

    @property
    def found(self) -> bool:
        if isinstance(self.result, frozenset):
            return bool(self.result)
        return self.result is not None


@dataclass(eq=False)
class DeclarationLog:
    """Tally of primitive outcomes against the true marked count.

    ``spurious`` counts elements returned when nothing was marked;
    ``missed_forced`` counts "no marked element" declared in forced mode
    although something was marked.
    """

    calls: int = 0
    spurious: int = 0
    missed_forced: int = 0

    @property
    def sound(self) -> bool:
        return self.spurious == 0 and self.missed_forced == 0


_audits: list[DeclarationLog] = []


@contextmanager
def audit_declarations():
    """Record every primitive outcome made inside the ``with`` block."""
    log = DeclarationLog()
    _audits.append(log)
    try:
        yield log
    finally:
        _audits.remove(log)


def _record(tf: int, found: bool, cfg: "SearchConfig") -> None:
    for log in _audits:
        log.calls += 1
        if tf == 0 and found:
            log.spurious += 1
        elif tf > 0 and not found and cfg.forced:
            log.missed_forced += 1


class CostOverrun(AssertionError):
    """A single predicate evaluation exceeded its declared cost."""


def grover_success_probability(N: int, k: int, T: int) -> float:
    """Probability of measuring a marked element after ``T`` Grover iterations
    on ``N`` elements of which ``k`` are marked."""
    if not (N >= 1 and 0 <= k <= N and T >= 0):
        raise ValueError(f"invalid arguments N={N}, k={k}, T={T}")
    if k == 0:
        return 0.0
    if T == 0:
        return k / N
    theta = math.asin(math.sqrt(k / N))
    return math.sin((2 * T + 1) * theta) ** 2


def attempt_succeeds(N: int, k: int, T: int, rng: random.Random) -> bool:
    """Sample one measurement after ``T`` iterations."""
    if k == 0:
        return False
    return rng.random() < grover_success_probability(N, k, T)


@functools.lru_cache(maxsize=65536)
def promise_iterations(N: int, t: float) -> int:
    """Iteration count for a search promised ``t/2 <= t_f <= t`` marked elements.

    Picks ``T`` in ``{0, ..., ceil(sqrt(N/t))}`` maximizing the smallest
    success probability over the promised range of ``t_f``; ties go to the
    smaller ``T``. Plain ``ceil(sqrt(N/t))`` over-rotates when ``N/t`` is
    small (``N = t``, ``t_f = 3N/4`` never succeeds).
    """
    lo = max(1, math.ceil(t / 2))
    hi = min(N, math.floor(t))
    cap = math.ceil(math.sqrt(N / t))
    best_T, best_p = 0, -1.0
    for T in range(cap + 1):
        worst = min(grover_success_probability(N, k, T) for k in range(lo, hi + 1))
        if worst > best_p:
            best_T, best_p = T, worst
    return best_T


def _charge_evals(p: Predicate, count: int, cfg: SearchConfig, ledger: QueryLedger) -> int:
    """Charge ``count`` evaluations of ``p``.

    One evaluation is run for real on a uniformly drawn domain element; its
    measured A/B split is then bulk-charged for the remaining ``count - 1``.
    """
    if count <= 0 or not p.domain:
        return 0
    x = p.domain[cfg.rng.randrange(len(p.domain))]
    a0, b0 = ledger.snapshot()
    p.charged_eval(x)
    da, db = ledger.count_A - a0, ledger.count_B - b0
    if da + db > p.declared_cost:
        raise CostOverrun(f"evaluation cost {da + db} exceeds declared {p.declared_cost}")
    ledger.charge((count - 1) * da, (count - 1) * db)
    return count * (da + db)


def grover_search(t: float, p: Predicate, cfg: SearchConfig, ledger: QueryLedger) -> PrimitiveOutcome:
    """Search for a marked element under the promise ``t/2 <= t_f <= t``.

    Uses :func:`promise_iterations` iterations per repetition and stops at the
    first successful repetition. The failure bound is the exact miss probability
    when the promise holds and 0 otherwise.
    """
    if t < 1:
        raise ValueError(f"threshold must be >= 1, got {t}")
    N = len(p.domain)
    if N == 0 or t > N:
        _record(len(p.marked()) if N else 0, False, cfg)
        return PrimitiveOutcome()
    marked = p.marked()
    tf = len(marked)
    T = promise_iterations(N, t)
    r = cfg.repetitions(N)
    prob = grover_success_probability(N, tf, T)

    out = PrimitiveOutcome()
    if not cfg.forced and tf >= 1 and t / 2 <= tf <= t:
        out.failure_probability_bound = (1.0 - prob) ** r
    for _ in range(r):
        q = _charge_evals(p, 2 * T + 1, cfg, ledger)
        if tf == 0:
            success = False
        elif cfg.forced:
            success = True
        else:
            success = attempt_succeeds(N, tf, T, cfg.rng)
        out.iteration_trace.append(Repetition(T, success, q))
        out.charged_queries += q
        if success:
            out.result = marked[cfg.rng.randrange(tf)]
            break
    _record(tf, out.result is not None, cfg)
    return out


def bbht_search(t: float, p: Predicate, cfg: SearchConfig, ledger: QueryLedger) -> PrimitiveOutcome:
    """Search for a marked element given only the lower bound ``t <= t_f``.

    Each repetition draws its iteration count uniformly from
    ``{0, ..., floor(sqrt(N/t))}``.
    """
    if t < 1:
        raise ValueError(f"lower bound must be >= 1, got {t}")
    N = len(p.domain)
    if N == 0 or t > N:
        _record(len(p.marked()) if N else 0, False, cfg)
        return PrimitiveOutcome()
    marked = p.marked()
    tf = len(marked)
    M = math.isqrt(int(N / t))
    r = cfg.repetitions(N)

    out = PrimitiveOutcome()
    if not cfg.forced and tf >= 1 and tf >= t:
        avg = sum(grover_success_probability(N, tf, T) for T in range(M + 1)) / (M + 1)
        out.failure_probability_bound = (1.0 - avg) ** r
    for _ in range(r):
        T = cfg.rng.randint(0, M)
        q = _charge_evals(p, 2 * T + 1, cfg, ledger)
        if tf == 0:
            success = False
        elif cfg.forced:
            success = True
        else:
            success = attempt_succeeds(N, tf, T, cfg.rng)
        out.iteration_trace.append(Repetition(T, success, q))
        out.charged_queries += q
        if success:
            out.result = marked[cfg.rng.randrange(tf)]
            break
    _record(tf, out.result is not None, cfg)
    return out


def search_all(p: Predicate, cfg: SearchConfig, ledger: QueryLedger) -> PrimitiveOutcome:
    """Find every marked element by repeated :func:`grover_search`.

    Starts at ``t = |U|``; a find removes the element and decrements ``t``,
    a miss halves ``t``. The predicate is re-evaluated on every call, so
    elements that become unmarked along the way are handled. The result is
    a frozenset, empty exactly when "no marked element" is declared.
    """
    V = list(p.domain)
    t: float = len(V)
    found: list[int] = []
    out = PrimitiveOutcome()
    while t >= 1:
        step = grover_search(t, p.restrict(V), cfg, ledger)
        out.charged_queries += step.charged_queries
        out.failure_probability_bound += step.failure_probability_bound
        out.iteration_trace.extend(step.iteration_trace)
        if step.result is not None:
            found.append(step.result)
            V.remove(step.result)
            t -= 1
        else:
            t /= 2
    out.result = frozenset(found)
    _record(len(p.marked()), bool(found), cfg)
    return out


# Frozen as the largest ratio of search_all charges to the envelope over
# N in {8, 16}, t_f in {0, 1, 2, 3, 5, 7, N/4, N/2, N}, seeds 0..19, both
# modes, with a leaf predicate; rounded up.
SEARCH_ALL_C = 1.16


def search_all_envelope(N: int, tf: int, C: float = SEARCH_ALL_C) -> float:
    """``C * sqrt(N (t_f + 1)) * log2(N + 2) ** 3``."""
    return C * math.sqrt(N * (tf + 1)) * math.log2(N + 2) ** 3


def find_max(p: Predicate, g: Callable[[int], float], cfg: SearchConfig,
             ledger: QueryLedger) -> PrimitiveOutcome:
    """Return a marked element maximizing ``g``; ties go to the earliest
    domain position. ``g`` is free to evaluate."""
    N = len(p.domain)
    if N == 0:
        return PrimitiveOutcome()
    K = math.ceil(cfg.c_rep * math.sqrt(N) * math.log2(N + 2))
    q = _charge_evals(p, K, cfg, ledger)
    marked = p.marked()
    out = PrimitiveOutcome(charged_queries=q)
    if not marked:
        out.iteration_trace.append(Repetition(K, False, q))
        _record(0, False, cfg)
        return out
    best = max(marked, key=g)
    if cfg.forced:
        out.result = best
    else:
        miss = min(1.0, N ** -cfg.failure_target_exponent)
        top = g(best)
        n_worse = sum(1 for x in marked if g(x) < top)
        out.failure_probability_bound = miss * n_worse / len(marked)
        if cfg.rng.random() < miss:
            out.result = marked[cfg.rng.randrange(len(marked))]
        else:
            out.result = best
    out.iteration_trace.append(Repetition(K, True, q))
    _record(len(marked), True, cfg)
    return out
