import math

import pytest

from qbmm.bench import calibrate_gc, run_gc_spec
from qbmm.graphcollision import (
    ALL_GC_C,
    HAS_GC_C,
    ComplementGraphView,
    GCInstance,
    all_gc,
    all_gc_envelope,
    brute_force_gc,
    has_collision,
    has_gc,
    has_gc_cost_cap,
    has_gc_envelope,
)
from qbmm.instances import gc_random_suite, gc_sweep, random_gc_instance
from qbmm.oracle import BooleanMatrix, QueryLedger
from qbmm.search import FAITHFUL, FORCED, SearchConfig


def instance(C_lists, f_A, f_B):
    return GCInstance.from_vectors(BooleanMatrix.from_lists(C_lists), f_A, f_B)


def test_complement_view_degrees():
    C = BooleanMatrix.from_lists([[1, 1, 0], [0, 0, 0], [1, 0, 0]])
    g = ComplementGraphView(C)
    assert g.c == [2, 0, 1] and g.m == 3
    assert g.degree_order == [2, 3, 1]
    assert g.degree(1) == 1
    assert g.has_edge(1, 3) and not g.has_edge(1, 1)
    assert g.neighbors(3) == 0b110


def test_from_vectors_layout():
    inst = instance([[0, 0], [0, 0]], [0, 1], [1, 1])
    assert inst.k == 1
    assert [inst.A[i, 1] for i in (1, 2)] == [0, 1]
    assert [inst.B[1, j] for j in (1, 2)] == [1, 1]


def test_no_marked_a_vertex():
    inst = instance([[0] * 4] * 4, [0, 0, 0, 0], [1, 1, 1, 1])
    for mode in (FORCED, FAITHFUL):
        pairs, out = all_gc(inst, SearchConfig(mode), QueryLedger())
        assert pairs == frozenset() and out.no_collision and out.case == 0
        assert has_gc(inst, SearchConfig(mode), QueryLedger())[0] == 0


def test_complete_bipartite_gives_all_pairs():
    n = 10
    f_A = [1, 0, 1, 1, 0, 0, 1, 0, 0, 0]
    f_B = [0, 1, 1, 0, 0, 0, 0, 0, 1, 0]
    inst = instance([[0] * n] * n, f_A, f_B)
    pairs, out = all_gc(inst, SearchConfig(FORCED), QueryLedger())
    assert len(pairs) == 4 * 3 == len(brute_force_gc(inst))
    assert out.case == 1


def test_case_two_path():
    # vertex 1 has every non-edge, so c_r^2 > m only when r = 1 is marked
    n = 8
    C = [[1] * n] + [[0] * n for _ in range(n - 1)]
    C[0][7] = 0
    inst = instance(C, [1] + [0] * (n - 1), [1] * n)
    pairs, out = all_gc(inst, SearchConfig(FORCED), QueryLedger())
    assert out.case == 2
    assert out.survivors <= math.ceil(math.sqrt(inst.graph.m))
    assert pairs == brute_force_gc(inst) == {(1, 8)}


def test_zero_non_edges_is_case_one():
    inst = instance([[0] * 3] * 3, [1, 1, 0], [0, 1, 0])
    _, out = all_gc(inst, SearchConfig(FORCED), QueryLedger())
    assert out.case == 1


def test_forced_exactness_random_suite():
    for spec in gc_random_suite(500):
        inst = spec.build()
        truth = brute_force_gc(inst)
        ledger = QueryLedger()
        pairs, out = all_gc(inst, SearchConfig(FORCED, rng_seed=spec.seed), ledger)
        assert pairs == truth, spec
        assert out.charged_queries == ledger.total
        assert has_gc(inst, SearchConfig(FORCED, rng_seed=spec.seed), QueryLedger())[0] == int(bool(truth))


def test_faithful_outputs_are_sound():
    for spec in gc_random_suite(200, seed=3):
        inst = spec.build()
        truth = brute_force_gc(inst)
        pairs, _ = all_gc(inst, SearchConfig(FAITHFUL, rng_seed=spec.seed), QueryLedger())
        assert pairs <= truth
        bit, out = has_gc(inst, SearchConfig(FAITHFUL, rng_seed=spec.seed), QueryLedger())
        if bit:
            assert out.witness in truth
        else:
            assert out.witness is None


def test_has_collision_matches_brute_force():
    for spec in gc_random_suite(100, seed=9):
        inst = spec.build()
        assert has_collision(inst.graph, inst.fa_bits, inst.fb_bits) == bool(brute_force_gc(inst))


def test_has_gc_within_declared_cap():
    cfg = SearchConfig(FORCED)
    for spec in gc_random_suite(200, seed=5):
        inst = spec.build()
        _, out = has_gc(inst, cfg, QueryLedger())
        assert out.charged_queries <= has_gc_cost_cap(inst.graph.n, inst.graph.m, cfg)


def test_random_gc_instance_has_m_non_edges():
    for conc in (False, True):
        inst = random_gc_instance(20, 37, 0.3, 0.3, 1, conc)
        assert inst.graph.m == 37
    with pytest.raises(ValueError):
        random_gc_instance(3, 10, 0.5, 0.5, 0)


def test_gc_constants_reproduce_from_n16_calibration():
    rows = [run_gc_spec(s, m) for m in (FORCED, FAITHFUL) for s in gc_sweep(ns=(16,))]
    c_all, c_has = calibrate_gc(rows)
    assert c_all <= ALL_GC_C < c_all + 0.01
    assert c_has <= HAS_GC_C < c_has + 0.01


def test_has_gc_envelope_out_of_sample_n64():
    for spec in gc_sweep(ns=(64,), seeds=range(2)):
        for mode in (FORCED, FAITHFUL):
            row = run_gc_spec(spec, mode)
            assert row.has_gc_queries <= has_gc_envelope(row.n, row.m)
            assert row.all_gc_queries <= all_gc_envelope(row.n, row.lam, row.m)
