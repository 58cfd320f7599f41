"""Finding graph collisions in bipartite graphs with few non-edges.

The graph is given through the matrix of recorded ones ``C_tilde``: the
A-side vertex ``i`` and the B-side vertex ``j`` are adjacent iff
``C_tilde[i, j] == 0``. The vertex colourings come from a fixed witness
index ``k``: ``f_A(i) = A[i, k]`` and ``f_B(j) = B[k, j]``, each read
through the charged oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .oracle import BooleanMatrix, QueryLedger, bits_of, iter_bits, read_A, read_B
from .search import (
    PrimitiveOutcome,
    Predicate,
    SearchConfig,
    bbht_search,
    find_max,
    search_all,
)


class ComplementGraphView:
    """Bipartite graph whose edges are the zeros of ``base``.

    ``c[i - 1]`` counts the non-edges at A-vertex ``i``; ``degree_order``
    lists A-vertices by non-increasing degree, ties by smallest index.
    """

    def __init__(self, base: BooleanMatrix):
        self.base = base
        self.n = base.n
        self.full = (1 << self.n) - 1
        self.c = [r.bit_count() for r in base.rows]
        self.m = sum(self.c)
        self.degree_order = sorted(range(1, self.n + 1), key=lambda i: (self.c[i - 1], i))
        self.position = {v: p for p, v in enumerate(self.degree_order)}

    def degree(self, i: int) -> int:
        return self.n - self.c[i - 1]

    def neighbors(self, i: int) -> int:
        """Bitset of B-side neighbours of A-vertex ``i``."""
        return self.full & ~self.base.rows[i - 1]

    def has_edge(self, i: int, j: int) -> bool:
        return not (self.base.rows[i - 1] >> (j - 1)) & 1


@dataclass
class GCInstance:
    graph: ComplementGraphView
    A: BooleanMatrix
    B: BooleanMatrix
    k: int
    # uncharged copies of f_A and f_B, used only for marked-set bookkeeping
    fa_bits: int | None = None
    fb_bits: int | None = None

    def __post_init__(self):
        if self.fa_bits is None:
            self.fa_bits = self.A.column(self.k)
        if self.fb_bits is None:
            self.fb_bits = self.B.row(self.k)

    @classmethod
    def from_vectors(cls, C_tilde: BooleanMatrix, f_A, f_B) -> "GCInstance":
        """Standalone instance: ``f_A`` becomes column 1 of A, ``f_B`` row 1 of B."""
        n = C_tilde.n
        if len(f_A) != n or len(f_B) != n:
            raise ValueError(f"vectors must have length {n}")
        fa = bits_of(i + 1 for i, v in enumerate(f_A) if v)
        fb = bits_of(j + 1 for j, v in enumerate(f_B) if v)
        A = BooleanMatrix(n, [((fa >> i) & 1) for i in range(n)])
        B = BooleanMatrix(n, [fb] + [0] * (n - 1))
        return cls(ComplementGraphView(C_tilde), A, B, 1, fa, fb)

    def side_A(self, ledger: QueryLedger, domain) -> Predicate:
        A, k, fa = self.A, self.k, self.fa_bits
        return Predicate(
            domain=domain,
            charged_eval=lambda i: read_A(ledger, A, i, k),
            ideal_eval=lambda i: (fa >> (i - 1)) & 1,
            declared_cost=1,
            marked_fn=lambda dom: [i for i in dom if (fa >> (i - 1)) & 1],
        )

    def side_B(self, ledger: QueryLedger, domain) -> Predicate:
        B, k, fb = self.B, self.k, self.fb_bits
        return Predicate(
            domain=domain,
            charged_eval=lambda j: read_B(ledger, B, k, j),
            ideal_eval=lambda j: (fb >> (j - 1)) & 1,
            declared_cost=1,
            marked_fn=lambda dom: [j for j in dom if (fb >> (j - 1)) & 1],
        )


@dataclass
class GCOutcome(PrimitiveOutcome):
    """Outcome of :func:`all_gc` / :func:`has_gc`.

    ``case`` is 0 when no marked A-vertex was found, else 1 or 2.
    ``survivors`` is the number of A-vertices read in case 2.
    """

    case: int = 0
    r: int | None = None
    survivors: int | None = None
    witness: tuple[int, int] | None = None
    no_collision: bool = False
    steps: list[PrimitiveOutcome] = field(default_factory=list, repr=False)

    def absorb(self, step: PrimitiveOutcome) -> PrimitiveOutcome:
        self.failure_probability_bound += step.failure_probability_bound
        self.iteration_trace.extend(step.iteration_trace)
        self.steps.append(step)
        return step


# Envelope constants, frozen as the largest ratio seen on the n = 16 slice of
# instances.gc_sweep() in either mode, rounded up.
ALL_GC_C = 0.89
HAS_GC_C = 0.25


def all_gc_envelope(n: int, lam: int, m: int, C: float = ALL_GC_C) -> float:
    """``C * (sqrt(n (lam + 1)) + sqrt(m + 1)) * log2(n + 2) ** 3``."""
    return C * (math.sqrt(n * (lam + 1)) + math.sqrt(m + 1)) * math.log2(n + 2) ** 3


def has_gc_envelope(n: int, m: int, C: float = HAS_GC_C) -> float:
    """``C * (sqrt(n) + sqrt(m)) * log2(n + 2) ** 3``."""
    return C * (math.sqrt(n) + math.sqrt(m)) * math.log2(n + 2) ** 3


class CaseTwoBoundViolation(AssertionError):
    pass


def brute_force_gc(inst: GCInstance) -> set[tuple[int, int]]:
    """All graph-collision pairs by exhaustive scan. Charges nothing."""
    n, k = inst.graph.n, inst.k
    C = inst.graph.base
    pairs = set()
    for i in range(1, n + 1):
        if not inst.A[i, k]:
            continue
        for j in range(1, n + 1):
            if inst.B[k, j] and C[i, j] == 0:
                pairs.add((i, j))
    return pairs


def has_collision(graph: ComplementGraphView, fa_bits: int, fb_bits: int) -> bool:
    """Uncharged bitset test for the existence of a collision."""
    if not fb_bits:
        return False
    rows = graph.base.rows
    for i in iter_bits(fa_bits):
        if fb_bits & ~rows[i - 1]:
            return True
    return False


def has_gc_cost_cap(n: int, m: int, cfg: SearchConfig) -> int:
    """Worst-case queries of one :func:`has_gc` call on ``n`` vertices per side
    and ``m`` non-edges.

    FindMax over n vertices, at most two Search calls on domains of size
    at most n, and at most floor(sqrt(m)) direct reads.
    """
    find_max_cost = math.ceil(cfg.c_rep * math.sqrt(n) * math.log2(n + 2))
    search_cost = cfg.repetitions(n) * (2 * math.isqrt(n) + 1)
    return find_max_cost + 2 * search_cost + math.isqrt(m)


def _highest_degree_marked(inst: GCInstance, cfg: SearchConfig, ledger: QueryLedger,
                           out: GCOutcome) -> int | None:
    g = inst.graph
    fm = out.absorb(find_max(inst.side_A(ledger, g.degree_order), g.degree, cfg, ledger))
    return fm.result


def _case_two_survivors(g: ComplementGraphView, r: int) -> list[int]:
    survivors = g.degree_order[g.position[r]:]
    if len(survivors) > math.ceil(math.sqrt(g.m)):
        raise CaseTwoBoundViolation(
            f"{len(survivors)} A-vertices survive but m={g.m} allows {math.ceil(math.sqrt(g.m))}")
    return survivors


def all_gc(inst: GCInstance, cfg: SearchConfig, ledger: QueryLedger
           ) -> tuple[frozenset[tuple[int, int]], GCOutcome]:
    """Find all graph collisions of ``inst``.

    Case 1 (the highest-degree marked vertex r has at most sqrt(m)
    non-neighbours) learns f_B completely, then searches the A-vertices
    adjacent to a marked B-vertex. Case 2 learns f_A on the few vertices
    that can still be marked, then searches the adjacent B-vertices.
    """
    g, n = inst.graph, inst.graph.n
    start = ledger.total
    out = GCOutcome()
    pairs: set[tuple[int, int]] = set()

    r = _highest_degree_marked(inst, cfg, ledger, out)
    if r is None:
        out.no_collision = True
        out.charged_queries = ledger.total - start
        out.result = frozenset()
        return out.result, out
    out.r = r
    c_r = g.c[r - 1]

    if c_r * c_r <= g.m:
        out.case = 1
        nbrs = list(iter_bits(g.neighbors(r)))
        found_B = out.absorb(search_all(inst.side_B(ledger, nbrs), cfg, ledger)).result
        for j in found_B:
            pairs.add((r, j))
        # unmarked neighbours of r are dropped; its non-neighbours are read directly
        marked_B = bits_of(found_B)
        for j in iter_bits(g.base.rows[r - 1]):
            if read_B(ledger, inst.B, inst.k, j):
                marked_B |= 1 << (j - 1)
        a_prime = [i for i in range(1, n + 1) if g.neighbors(i) & marked_B]
        found_A = out.absorb(search_all(inst.side_A(ledger, a_prime), cfg, ledger)).result
        for i in found_A:
            for j in iter_bits(g.neighbors(i) & marked_B):
                pairs.add((i, j))
    else:
        out.case = 2
        survivors = _case_two_survivors(g, r)
        out.survivors = len(survivors)
        marked_A = 0
        for i in survivors:
            if read_A(ledger, inst.A, i, inst.k):
                marked_A |= 1 << (i - 1)
        adj = 0
        for i in iter_bits(marked_A):
            adj |= g.neighbors(i)
        b_prime = list(iter_bits(adj))
        found_B = out.absorb(search_all(inst.side_B(ledger, b_prime), cfg, ledger)).result
        for j in found_B:
            for i in iter_bits(marked_A):
                if g.has_edge(i, j):
                    pairs.add((i, j))

    out.charged_queries = ledger.total - start
    out.result = frozenset(pairs)
    out.no_collision = not pairs
    return out.result, out


def has_gc(inst: GCInstance, cfg: SearchConfig, ledger: QueryLedger) -> tuple[int, GCOutcome]:
    """Decide whether ``inst`` has a graph collision.

    Same control flow as :func:`all_gc` with ``Search`` (lower bound 1) in
    place of ``SearchAll``; returns early once a collision is certain.
    """
    g, n = inst.graph, inst.graph.n
    start = ledger.total
    out = GCOutcome()

    def done(witness):
        out.witness = witness
        out.result = 1 if witness else 0
        out.no_collision = witness is None
        out.charged_queries = ledger.total - start
        return out.result, out

    r = _highest_degree_marked(inst, cfg, ledger, out)
    if r is None:
        return done(None)
    out.r = r
    c_r = g.c[r - 1]

    if c_r * c_r <= g.m:
        out.case = 1
        nbrs = list(iter_bits(g.neighbors(r)))
        j = out.absorb(bbht_search(1, inst.side_B(ledger, nbrs), cfg, ledger)).result
        if j is not None:
            return done((r, j))
        marked_B = 0
        for j in iter_bits(g.base.rows[r - 1]):
            if read_B(ledger, inst.B, inst.k, j):
                marked_B |= 1 << (j - 1)
        if not marked_B:
            return done(None)
        a_prime = [i for i in range(1, n + 1) if g.neighbors(i) & marked_B]
        i = out.absorb(bbht_search(1, inst.side_A(ledger, a_prime), cfg, ledger)).result
        if i is None:
            return done(None)
        j = next(iter_bits(g.neighbors(i) & marked_B))
        return done((i, j))

    out.case = 2
    survivors = _case_two_survivors(g, r)
    out.survivors = len(survivors)
    marked_A = 0
    for i in survivors:
        if read_A(ledger, inst.A, i, inst.k):
            marked_A |= 1 << (i - 1)
    adj = 0
    for i in iter_bits(marked_A):
        adj |= g.neighbors(i)
    j = out.absorb(bbht_search(1, inst.side_B(ledger, list(iter_bits(adj))), cfg, ledger)).result
    if j is None:
        return done(None)
    i = next(i for i in iter_bits(marked_A) if g.has_edge(i, j))
    return done((i, j))
