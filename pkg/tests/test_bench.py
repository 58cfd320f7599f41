import math

import pytest

from qbmm.bench import (
    HEADER,
    BenchCell,
    BenchRow,
    DegenerateFit,
    cartesian_cells,
    fit_rows,
    read_csv,
    run_cell,
    run_cells,
    write_csv,
)

GOLDEN_HEADER = ("n,family,ell_target,seed,mode,ell_actual,witnesses,queries_A,queries_B,"
                 "queries_total,bound,within_bound,correct,failure_budget,wall_ms")


def synthetic(n, ell, q):
    return BenchRow(n, "random", ell, 0, "forced", ell, 0, q, 0, q, 1e12, True, True, 0.0, 0.0)


def test_golden_header(tmp_path):
    assert ",".join(HEADER) == GOLDEN_HEADER
    path = tmp_path / "x.csv"
    write_csv(path, [])
    assert path.read_text().splitlines() == [GOLDEN_HEADER]


def test_single_cell_row(tmp_path):
    row = run_cell(BenchCell("random", 8, 10, 0))
    assert row.queries_total == row.queries_A + row.queries_B
    assert row.within_bound == (row.queries_total <= row.bound)
    assert row.correct
    path = tmp_path / "one.csv"
    write_csv(path, [row])
    lines = path.read_text().splitlines()
    assert len(lines) == 2
    back = read_csv(path)[0]
    assert (back.n, back.queries_total, back.within_bound, back.correct) == \
        (row.n, row.queries_total, row.within_bound, row.correct)


def test_zero_family_rows_within_bound():
    rows = run_cells(cartesian_cells(["zero"], [8, 16, 32], [0], range(2)))
    assert all(r.ell_actual == 0 and r.within_bound for r in rows)


def test_cells_order_and_clipping():
    cells = cartesian_cells(["random", "zero"], [4, 8], [0, 100], range(2))
    assert len(cells) == 16
    assert cells[0] == BenchCell("random", 4, 0, 0)
    assert cells[2].ell_target == 16
    assert [c.family for c in cells[:8]] == ["random"] * 8


def test_rows_are_deterministic_and_parallel_order_is_kept():
    cells = cartesian_cells(["target-ell", "threshold"], [8, 12], [4, 30], range(2))
    serial = run_cells(cells)
    parallel = run_cells(cells, jobs=2)
    key = lambda rows: [(r.n, r.family, r.seed, r.ell_actual, r.queries_A, r.queries_B) for r in rows]
    assert key(serial) == key(parallel)
    assert sum(r.queries_total for r in serial) == sum(r.queries_total for r in run_cells(cells))


def test_fit_exact_power_law():
    rows = [synthetic(n, ell, n * math.sqrt(ell + 1)) for n in (8, 16, 32, 64) for ell in (0, 3, 99)]
    fit = fit_rows(rows)
    assert fit.slope == pytest.approx(1.0)
    assert fit.r2 == pytest.approx(1.0)
    assert fit.passed and "PASS" in fit.summary()


def test_fit_constant_queries_fails():
    rows = [synthetic(n, ell, 1000) for n in (8, 16, 32, 64) for ell in (0, 3, 99)]
    fit = fit_rows(rows)
    assert fit.slope == pytest.approx(0.0, abs=1e-12)
    assert not fit.passed and "FAIL" in fit.summary()


def test_fit_needs_bound_and_rows():
    rows = [synthetic(n, ell, n * math.sqrt(ell + 1)) for n in (8, 16, 32, 64) for ell in (0, 3, 99)]
    rows[0].within_bound = False
    assert not fit_rows(rows).passed
    with pytest.raises(DegenerateFit):
        fit_rows(rows[:5])
    with pytest.raises(DegenerateFit):
        fit_rows([synthetic(8, 3, 10 + i) for i in range(12)])


def test_read_csv_rejects_missing_columns(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("n,seed\n1,2\n")
    with pytest.raises(ValueError):
        read_csv(path)
