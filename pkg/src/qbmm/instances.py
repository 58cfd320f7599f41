"""Seeded instance generators with controlled output density.

Every generator is a pure function of its arguments; all randomness comes
from ``random.Random(seed)``.
"""

from __future__ import annotations

import math
import os
import random
from dataclasses import dataclass

from .graphcollision import GCInstance
from .oracle import BooleanMatrix, brute_force_product, write_matrix

FAMILIES = ("random", "target-ell", "threshold", "single-witness", "zero")


class InstanceGenerationError(RuntimeError):
    """Target density not reached; ``closest`` holds the best ``(A, B, ell)`` seen."""

    def __init__(self, message, closest):
        super().__init__(message)
        self.closest = closest


@dataclass(frozen=True)
class InstanceSpec:
    n: int
    family: str = "random"
    seed: int = 0
    target_ell: int | None = None
    density_A: float = 0.0
    density_B: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.target_ell is not None and not 0 <= self.target_ell <= self.n * self.n:
            raise ValueError(f"target_ell must lie in [0, {self.n * self.n}]")


def bernoulli_matrix(n: int, p: float, rng: random.Random) -> BooleanMatrix:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"density must lie in [0, 1], got {p}")
    rows = []
    for _ in range(n):
        bits = 0
        for j in range(n):
            if rng.random() < p:
                bits |= 1 << j
        rows.append(bits)
    return BooleanMatrix(n, rows)


def density_for_ell(n: int, ell: float) -> float:
    """Shared density p with expected product ones ``n^2 (1 - (1 - p^2)^n) = ell``."""
    frac = min(max(ell / (n * n), 0.0), 1.0)
    if frac >= 1.0:
        return 1.0
    return math.sqrt(1.0 - (1.0 - frac) ** (1.0 / n))


def random_instance(n: int, pA: float, pB: float, seed: int):
    """I.i.d. Bernoulli A and B; returns ``(A, B, ell_actual)``."""
    rng = random.Random(seed)
    A = bernoulli_matrix(n, pA, rng)
    B = bernoulli_matrix(n, pB, rng)
    return A, B, brute_force_product(A, B).count_ones()


def instance_with_target_ell(n: int, ell_star: int, seed: int, max_iter: int = 50):
    """Instance with ``ell_actual`` within a factor 2 of ``ell_star``.

    Bisects the shared density, drawing a fresh instance at each step.
    Raises :class:`InstanceGenerationError` if ``max_iter`` draws miss the
    window.
    """
    if not 0 <= ell_star <= n * n:
        raise ValueError(f"target must lie in [0, {n * n}], got {ell_star}")
    if ell_star == 0:
        return BooleanMatrix.zeros(n), BooleanMatrix.zeros(n), 0
    if ell_star == n * n:
        return BooleanMatrix.ones(n), BooleanMatrix.ones(n), n * n
    rng = random.Random(seed)
    lo, hi = 0.0, 1.0
    p = density_for_ell(n, ell_star)
    closest, closest_gap = None, math.inf
    for _ in range(max_iter):
        A = bernoulli_matrix(n, p, rng)
        B = bernoulli_matrix(n, p, rng)
        ell = brute_force_product(A, B).count_ones()
        if ell_star / 2 <= ell <= 2 * ell_star:
            return A, B, ell
        gap = abs(math.log((ell + 0.5) / ell_star))
        if gap < closest_gap:
            closest, closest_gap = (A, B, ell), gap
        if ell < ell_star / 2:
            lo = p
        else:
            hi = p
        p = (lo + hi) / 2
    raise InstanceGenerationError(
        f"no instance with ell in [{ell_star / 2}, {2 * ell_star}] after {max_iter} draws", closest)


def threshold_instance(n: int, t_f: int, seed: int):
    """A is the identity; B has exactly ``t_f`` ones, so the product is B."""
    if not 0 <= t_f <= n * n:
        raise ValueError(f"t_f must lie in [0, {n * n}], got {t_f}")
    rng = random.Random(seed)
    rows = [0] * n
    for pos in rng.sample(range(n * n), t_f):
        rows[pos // n] |= 1 << (pos % n)
    return BooleanMatrix.identity(n), BooleanMatrix(n, rows)


def best_factor_pair(n: int, ell_star: int) -> tuple[int, int]:
    """``(a, b)`` with ``a, b <= n`` maximizing ``a * b <= ell_star``;
    ties prefer the most balanced pair, then the smaller ``a``."""
    best = (0, 0)
    for a in range(1, n + 1):
        b = min(n, ell_star // a)
        cand, cur = a * b, best[0] * best[1]
        if cand > cur or (cand == cur and abs(a - b) < abs(best[0] - best[1])):
            best = (a, b)
    return best


def single_witness_instance(n: int, ell_star: int, seed: int):
    """A nonzero only in column 1 and B only in row 1, so index 1 witnesses
    every one of the product."""
    if not 0 <= ell_star <= n * n:
        raise ValueError(f"target must lie in [0, {n * n}], got {ell_star}")
    rng = random.Random(seed)
    a, b = best_factor_pair(n, ell_star)
    A_rows = [0] * n
    for i in rng.sample(range(n), a):
        A_rows[i] = 1
    b_row = 0
    for j in rng.sample(range(n), b):
        b_row |= 1 << j
    return BooleanMatrix(n, A_rows), BooleanMatrix(n, [b_row] + [0] * (n - 1))


def make_instance(spec: InstanceSpec):
    """Dispatch on ``spec.family``; returns ``(A, B, ell_actual)``.

    A target-ell miss falls back to the closest instance found.
    """
    n, seed = spec.n, spec.seed
    target = spec.target_ell if spec.target_ell is not None else 0
    if spec.family == "zero":
        A, B = BooleanMatrix.zeros(n), BooleanMatrix.zeros(n)
    elif spec.family == "random":
        if spec.target_ell is not None:
            p = density_for_ell(n, target)
            return random_instance(n, p, p, seed)
        return random_instance(n, spec.density_A, spec.density_B, seed)
    elif spec.family == "target-ell":
        try:
            return instance_with_target_ell(n, target, seed)
        except InstanceGenerationError as exc:
            return exc.closest
    elif spec.family == "threshold":
        A, B = threshold_instance(n, target, seed)
    else:
        A, B = single_witness_instance(n, target, seed)
    return A, B, brute_force_product(A, B).count_ones()


def instance_filenames(family: str, n: int, seed: int) -> tuple[str, str]:
    stem = f"{family}_n{n}_seed{seed}"
    return f"{stem}_A.txt", f"{stem}_B.txt"


def dump_instance(directory, family: str, n: int, seed: int,
                  A: BooleanMatrix, B: BooleanMatrix) -> tuple[str, str]:
    os.makedirs(directory, exist_ok=True)
    paths = tuple(os.path.join(directory, name) for name in instance_filenames(family, n, seed))
    write_matrix(paths[0], A)
    write_matrix(paths[1], B)
    return paths


def random_gc_instance(n: int, m: int, pA: float, pB: float, seed: int,
                       concentrated: bool = False) -> GCInstance:
    """Graph-collision instance with exactly ``m`` non-edges.

    With ``concentrated`` the non-edges are packed into as few A-rows as
    possible and f_A is supported on those rows only, so the highest-degree
    marked vertex has many non-neighbours.
    """
    if not 0 <= m <= n * n:
        raise ValueError(f"m must lie in [0, {n * n}]")
    rng = random.Random(seed)
    heavy = None
    if concentrated and m:
        heavy = rng.sample(range(n), -(-m // n))
        cells = rng.sample([(i, j) for i in heavy for j in range(n)], m)
    else:
        cells = [divmod(pos, n) for pos in rng.sample(range(n * n), m)]
    C_rows = [0] * n
    for i, j in cells:
        C_rows[i] |= 1 << j
    f_A = [int(rng.random() < pA) for _ in range(n)]
    if heavy is not None:
        f_A = [v if i in heavy else 0 for i, v in enumerate(f_A)]
    f_B = [int(rng.random() < pB) for _ in range(n)]
    return GCInstance.from_vectors(BooleanMatrix(n, C_rows), f_A, f_B)


@dataclass(frozen=True)
class GCSpec:
    n: int
    m: int
    pA: float
    pB: float
    seed: int
    concentrated: bool = False

    def build(self) -> GCInstance:
        return random_gc_instance(self.n, self.m, self.pA, self.pB, self.seed, self.concentrated)


GC_SWEEP_NS = (16, 32, 64)
GC_SWEEP_MS = (0, 10, 50, 100, 200, 256)
GC_SWEEP_DENSITIES = ((0.05, 0.05), (0.2, 0.2), (0.5, 0.1), (0.1, 0.5))


def gc_sweep(ns=GC_SWEEP_NS, seeds=range(4)) -> list[GCSpec]:
    """Grid over n, m (clipped to n^2), density pairs, layout and seed."""
    specs = []
    for n in ns:
        for m in GC_SWEEP_MS:
            for pA, pB in GC_SWEEP_DENSITIES:
                for conc in (False, True):
                    for s in seeds:
                        specs.append(GCSpec(n, min(m, n * n), pA, pB, s * 7919 + n, conc))
    return specs


def gc_random_suite(count: int, seed: int = 0, max_n: int = 64, max_m: int = 200) -> list[GCSpec]:
    """``count`` instances with n, m, densities and layout all drawn from ``seed``."""
    rng = random.Random(seed)
    specs = []
    for s in range(count):
        n = rng.randint(1, max_n)
        m = rng.randint(0, min(max_m, n * n))
        specs.append(GCSpec(n, m, rng.choice((0.05, 0.2, 0.5, 0.9)),
                            rng.choice((0.05, 0.2, 0.5, 0.9)), seed * 100003 + s,
                            rng.random() < 0.3))
    return specs


def near_threshold_instances(count: int, seed: int = 0, sizes=(2, 3, 4, 6, 8, 12, 16)):
    """``(f, ell)`` pairs with ``popcount(f)`` within 2 of ``ell``.

    ``f`` has length ``n^2`` for ``n`` drawn from ``sizes``; the offset
    cycles through -2..2 so both sides of the threshold are covered.
    """
    rng = random.Random(seed)
    out = []
    for s in range(count):
        n = rng.choice(sizes)
        ell = rng.randint(1, n * n)
        ones = min(max(ell + (s % 5) - 2, 0), n * n)
        f = [0] * (n * n)
        for pos in rng.sample(range(n * n), ones):
            f[pos] = 1
        out.append((f, ell))
    return out
