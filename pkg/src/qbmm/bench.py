"""Benchmark rows, CSV I/O, calibration of the cost envelope and the
log-log scaling fit."""

from __future__ import annotations

import csv
import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import bmm as _bmm
from .graphcollision import all_gc, all_gc_envelope, brute_force_gc, has_gc, has_gc_envelope
from .instances import InstanceSpec, dump_instance, make_instance
from .oracle import QueryLedger, brute_force_product
from .search import FORCED, SearchConfig

DEFAULT_NS = (16, 32, 64, 128, 256)
DEFAULT_ELLS = (0, 4, 64, 1024, 16384)
DEFAULT_SEEDS = tuple(range(10))
DEFAULT_FAMILY = "target-ell"
CALIBRATION_NS = (8, 16)
CALIBRATION_FAMILIES = ("random", "target-ell", "threshold", "single-witness")


@dataclass
class BenchRow:
    n: int
    family: str
    ell_target: int
    seed: int
    mode: str
    ell_actual: int
    witnesses: int
    queries_A: int
    queries_B: int
    queries_total: int
    bound: float
    within_bound: bool
    correct: bool
    failure_budget: float
    wall_ms: float

    def to_csv(self) -> list[str]:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool):
                out.append("true" if v else "false")
            elif f.name == "bound":
                out.append(f"{v:.3f}")
            elif f.name == "failure_budget":
                out.append(f"{v:.6g}")
            elif f.name == "wall_ms":
                out.append(f"{v:.1f}")
            else:
                out.append(str(v))
        return out

    @classmethod
    def from_csv(cls, rec: dict) -> "BenchRow":
        kw = {}
        for f in fields(cls):
            raw = rec[f.name]
            if f.type == "bool":
                kw[f.name] = raw == "true"
            elif f.type == "int":
                kw[f.name] = int(raw)
            elif f.type == "float":
                kw[f.name] = float(raw)
            else:
                kw[f.name] = raw
        return cls(**kw)


HEADER = tuple(f.name for f in fields(BenchRow))


@dataclass(frozen=True)
class BenchCell:
    family: str
    n: int
    ell_target: int
    seed: int
    mode: str = FORCED
    c_rep: float = 3.0
    c_fit: float = _bmm.C_FIT
    k_log: float = _bmm.K_LOG
    dump_dir: str | None = None


def cartesian_cells(families, ns, ells, seeds, **kw) -> list[BenchCell]:
    """One cell per (family, n, ell, seed) in that nesting order.

    Targets above ``n^2`` are clipped to ``n^2``.
    """
    return [BenchCell(fam, n, min(ell, n * n), seed, **kw)
            for fam, n, ell, seed in itertools.product(families, ns, ells, seeds)]


def run_cell(cell: BenchCell) -> BenchRow:
    A, B, _ = make_instance(InstanceSpec(cell.n, cell.family, cell.seed, cell.ell_target))
    if cell.dump_dir:
        dump_instance(cell.dump_dir, cell.family, cell.n, cell.seed, A, B)
    cfg = SearchConfig(mode=cell.mode, c_rep=cell.c_rep, rng_seed=cell.seed)
    t0 = time.perf_counter()
    C, report = _bmm.bmm(A, B, cfg)
    wall_ms = (time.perf_counter() - t0) * 1000
    truth = brute_force_product(A, B)
    ell = truth.count_ones()
    bound = _bmm.cost_bound(cell.n, ell, cell.c_fit, cell.k_log)
    return BenchRow(
        n=cell.n, family=cell.family, ell_target=cell.ell_target, seed=cell.seed,
        mode=cell.mode, ell_actual=ell, witnesses=report.total_witnesses,
        queries_A=report.count_A, queries_B=report.count_B,
        queries_total=report.queries_total, bound=bound,
        within_bound=report.queries_total <= bound, correct=C == truth,
        failure_budget=report.accumulated_failure_bound, wall_ms=wall_ms,
    )


def run_cells(cells, jobs: int = 1) -> list[BenchRow]:
    """Rows come back in cell order whatever the completion order."""
    if jobs <= 1:
        return [run_cell(c) for c in cells]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_cell, cells, chunksize=1))


def write_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HEADER)
        for row in rows:
            w.writerow(row.to_csv())


def read_csv(path) -> list[BenchRow]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(HEADER) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"CSV lacks columns: {sorted(missing)}")
        return [BenchRow.from_csv(rec) for rec in reader]


@dataclass
class FitResult:
    slope: float
    intercept: float
    r2: float
    rows: int
    all_within_bound: bool
    passed: bool

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"slope={self.slope:.4f} intercept={self.intercept:.4f} "
                f"r2={self.r2:.4f} rows={self.rows} "
                f"within_bound={'all' if self.all_within_bound else 'not all'} {verdict}")


class DegenerateFit(ValueError):
    pass


def fit_rows(rows, slope_range=(0.8, 1.2)) -> FitResult:
    """OLS of ``log(queries_total)`` on ``log(n * sqrt(ell_actual + 1))``."""
    rows = list(rows)
    if len(rows) < 10:
        raise DegenerateFit(f"need at least 10 rows, got {len(rows)}")
    x = np.log([r.n * math.sqrt(r.ell_actual + 1) for r in rows])
    y = np.log([max(r.queries_total, 1) for r in rows])
    if np.ptp(x) == 0:
        raise DegenerateFit("all rows share the same n*sqrt(ell+1)")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    within = all(r.within_bound for r in rows)
    passed = slope_range[0] <= slope <= slope_range[1] and within
    return FitResult(float(slope), float(intercept), r2, len(rows), within, passed)


def calibrate(rows) -> tuple[float, int]:
    """``(C_fit, k_log)`` from calibration rows; rows sharing a
    ``(family, ell_target)`` cell form one regression group."""
    samples = [(r.n, r.ell_actual, r.queries_total) for r in rows]
    groups = [(r.family, r.ell_target) for r in rows]
    return _bmm.calibrate_cost_bound(samples, groups)


def calibration_cells(families=CALIBRATION_FAMILIES, ells=DEFAULT_ELLS, seeds=DEFAULT_SEEDS,
                      mode=FORCED) -> list[BenchCell]:
    return cartesian_cells(families, CALIBRATION_NS, ells, seeds, mode=mode)


def rows_as_dicts(rows) -> list[dict]:
    return [asdict(r) for r in rows]


@dataclass
class GCRow:
    n: int
    m: int
    lam: int
    mode: str
    all_gc_queries: int
    has_gc_queries: int
    exact: bool
    has_gc_correct: bool


def run_gc_spec(spec, mode: str = FORCED, c_rep: float = 3.0) -> GCRow:
    """Run all_gc and has_gc on one :class:`~qbmm.instances.GCSpec`."""
    inst = spec.build()
    truth = brute_force_gc(inst)
    pairs, out = all_gc(inst, SearchConfig(mode, c_rep, spec.seed), QueryLedger())
    bit, out2 = has_gc(inst, SearchConfig(mode, c_rep, spec.seed), QueryLedger())
    return GCRow(spec.n, spec.m, len(truth), mode, out.charged_queries, out2.charged_queries,
                 pairs == truth, bit == int(bool(truth)))


def calibrate_gc(rows) -> tuple[float, float]:
    """Largest all_gc and has_gc envelope ratios, i.e. the constants ``C``
    that make every row fit."""
    rows = list(rows)
    c_all = max(r.all_gc_queries / all_gc_envelope(r.n, r.lam, r.m, 1.0) for r in rows)
    c_has = max(r.has_gc_queries / has_gc_envelope(r.n, r.m, 1.0) for r in rows)
    return c_all, c_has
