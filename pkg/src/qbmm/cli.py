"""Command-line entry point: ``qbmm {multiply,gc,bench,fit,validate,calibrate}``.

Exit codes: 0 success, 1 verification or invariant failure, 2 usage or
parse error.
"""

from __future__ import annotations

import argparse
import sys

from . import bench as _bench
from . import bmm as _bmm
from .graphcollision import GCInstance, all_gc, brute_force_gc, has_gc
from .instances import FAMILIES, gc_sweep
from .oracle import MatrixFormatError, QueryLedger, read_matrix
from .search import FAITHFUL, FORCED, SearchConfig
from .validate import SUITE_NAMES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULT_VALIDATE_SEEDS = {"primitives": 200, "gc": 500, "bmm": 10, "all": 10}


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _families(text: str) -> list[str]:
    fams = [x.strip() for x in text.split(",") if x.strip()]
    bad = [f for f in fams if f not in FAMILIES]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown families {bad}; choose from {FAMILIES}")
    return fams


def _load(path: str):
    try:
        return read_matrix(path)
    except MatrixFormatError as exc:
        raise UsageError(f"{path}: {exc}")
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}")


def _read_vector(path: str, n: int) -> list[int]:
    try:
        with open(path) as fh:
            text = fh.read().strip()
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}")
    if len(text) != n or set(text) - {"0", "1"}:
        raise UsageError(f"{path}: line 1: expected {n} characters from 0/1")
    return [int(c) for c in text]


def _config(args) -> SearchConfig:
    return SearchConfig(mode=args.mode, c_rep=args.c_rep, rng_seed=args.seed,
                        failure_target_exponent=args.failure_exponent)


def cmd_multiply(args) -> int:
    A, B = _load(args.A), _load(args.B)
    if A.n != B.n:
        raise UsageError(f"dimension mismatch: {A.n} vs {B.n}")
    C, report = _bmm.bmm(A, B, _config(args))
    ok = _bmm.verify(A, B, C)
    sys.stdout.write(C.to_text())
    print(f"ell={C.count_ones()} witnesses={report.total_witnesses} "
          f"queries={report.queries_total} (A={report.count_A} B={report.count_B}) "
          f"failure_budget={report.accumulated_failure_bound:.6g} "
          f"verify={'ok' if ok else 'FAIL'}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_gc(args) -> int:
    C = _load(args.C)
    inst = GCInstance.from_vectors(C, _read_vector(args.FA, C.n), _read_vector(args.FB, C.n))
    ledger = QueryLedger()
    cfg = _config(args)
    if args.exists:
        bit, out = has_gc(inst, cfg, ledger)
        witness = "" if out.witness is None else f" {out.witness[0]} {out.witness[1]}"
        print(f"{bit}{witness}")
    else:
        pairs, out = all_gc(inst, cfg, ledger)
        for i, j in sorted(pairs):
            print(i, j)
    print(f"lambda={len(brute_force_gc(inst))} m={inst.graph.m} case={out.case} "
          f"queries={out.charged_queries} (A={ledger.count_A} B={ledger.count_B}) "
          f"failure_budget={out.failure_probability_bound:.6g}", file=sys.stderr)
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        fh = open(args.out, "a")
    except OSError as exc:
        raise UsageError(f"{args.out}: {exc.strerror}")
    fh.close()
    cells = _bench.cartesian_cells(
        args.families, args.n, args.ell, range(args.seeds), mode=args.mode,
        c_rep=args.c_rep, c_fit=args.c_fit, k_log=args.k_log, dump_dir=args.dump_dir)
    rows = _bench.run_cells(cells, args.jobs)
    _bench.write_csv(args.out, rows)
    within = sum(r.within_bound for r in rows)
    correct = sum(r.correct for r in rows)
    print(f"rows={len(rows)} within_bound={within} correct={correct} -> {args.out}",
          file=sys.stderr)
    return EXIT_OK


def cmd_fit(args) -> int:
    try:
        rows = _bench.read_csv(args.csv)
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"{args.csv}: {exc}")
    try:
        fit = _bench.fit_rows(rows)
    except _bench.DegenerateFit as exc:
        print(f"degenerate fit: {exc} FAIL")
        return EXIT_FAIL
    print(fit.summary())
    return EXIT_OK if fit.passed else EXIT_FAIL


def cmd_validate(args) -> int:
    seeds = args.seeds if args.seeds is not None else DEFAULT_VALIDATE_SEEDS[args.suite]
    tally = run_suite(args.suite, seeds)
    for line in tally.lines():
        print(line)
    print("PASS" if tally.ok else "FAIL")
    return EXIT_OK if tally.ok else EXIT_FAIL


def cmd_calibrate(args) -> int:
    cells = _bench.calibration_cells(seeds=range(args.seeds), mode=args.mode)
    C_fit, k_log = _bench.calibrate(_bench.run_cells(cells, args.jobs))
    gc_rows = [_bench.run_gc_spec(s, m) for m in (FORCED, FAITHFUL) for s in gc_sweep(ns=(16,))]
    c_all, c_has = _bench.calibrate_gc(gc_rows)
    print(f"C_fit={C_fit:.6f} k_log={k_log} all_gc_C={c_all:.6f} has_gc_C={c_has:.6f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qbmm", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def search_flags(p):
        p.add_argument("--mode", choices=(FORCED, FAITHFUL), default=FORCED)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--c-rep", type=float, default=3.0)
        p.add_argument("--failure-exponent", type=float, default=2.0)

    p = sub.add_parser("multiply", help="multiply two matrix files")
    p.add_argument("A")
    p.add_argument("B")
    search_flags(p)
    p.set_defaults(func=cmd_multiply)

    p = sub.add_parser("gc", help="standalone graph collision on C_tilde, f_A, f_B files")
    p.add_argument("C")
    p.add_argument("FA")
    p.add_argument("FB")
    p.add_argument("--exists", action="store_true", help="decide existence only")
    search_flags(p)
    p.set_defaults(func=cmd_gc)

    p = sub.add_parser("bench", help="run a benchmark sweep into a CSV file")
    p.add_argument("--families", type=_families, default=[_bench.DEFAULT_FAMILY])
    p.add_argument("--n", type=_int_list, default=list(_bench.DEFAULT_NS))
    p.add_argument("--ell", type=_int_list, default=list(_bench.DEFAULT_ELLS))
    p.add_argument("--seeds", type=int, default=len(_bench.DEFAULT_SEEDS),
                   help="number of seeds, run as 0..SEEDS-1")
    p.add_argument("--mode", choices=(FORCED, FAITHFUL), default=FORCED)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--c-rep", type=float, default=3.0)
    p.add_argument("--c-fit", type=float, default=_bmm.C_FIT)
    p.add_argument("--k-log", type=float, default=_bmm.K_LOG)
    p.add_argument("--dump-dir")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("fit", help="log-log fit of a bench CSV")
    p.add_argument("csv")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("validate", help="run invariant suites")
    p.add_argument("--suite", choices=SUITE_NAMES, default="all")
    p.add_argument("--seeds", type=int)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("calibrate", help="recompute the envelope constants")
    p.add_argument("--seeds", type=int, default=len(_bench.DEFAULT_SEEDS))
    p.add_argument("--mode", choices=(FORCED, FAITHFUL), default=FORCED)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_calibrate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"qbmm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
