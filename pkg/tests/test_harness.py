import numpy as np
import pytest

from rotorwalk import engine
from rotorwalk import harness as H
from rotorwalk.graphs import (WalkState, build_bidirected_grid, find_cycles,
                              is_eulerian, is_unicycle)

SEED = 20240811


@pytest.mark.parametrize("name", sorted(H.SUITES))
def test_suite_green(name):
    res = H.run_suite(name, 30, SEED, grid=(10, 10))
    assert res.failures == 0, res.first_failure
    assert res.trials == 30 and res.seeds == []


def ring_unicycle_5x5():
    """Unicycle whose cycle is the 5x5 boundary run clockwise; all nine
    interior rotors point north, feeding the top edge of the ring."""
    g = build_bidirected_grid(5, 5)
    ring = [0, 5, 10, 15, 20, 21, 22, 23, 24, 19, 14, 9, 4, 3, 2, 1]
    rotors = np.zeros(25, dtype=np.int64)
    for i, v in enumerate(ring):
        rotors[v] = g.edge_index(v, ring[(i + 1) % len(ring)])
    return g, WalkState(rotors, 0)


def test_contour_reversal_on_5x5_ring():
    g, s = ring_unicycle_5x5()
    assert is_unicycle(g, s)
    rep = H.verify_contour_reversal(g, s)
    assert rep.passed, rep.failed()
    assert rep.details["contour_len"] == 16
    assert rep.details["interior"] == 9
    assert rep.details["steps"] == 64


def test_contour_reversal_steps_match_single_step_replay():
    # same stop condition applied one engine.step at a time: the kernel's
    # step count must agree with this independent loop
    g, s = ring_unicycle_5x5()
    cyc = find_cycles(g, s.rotors)[0]
    vs = cyc.vertices
    targets = {vs[i]: g.edge_index(vs[i], vs[i - 1]) for i in range(len(vs))}
    cur = s.copy()
    t = 0
    while True:
        cur = engine.step(g, cur)
        t += 1
        if cur.chip == s.chip and all(cur.rotors[v] == a
                                      for v, a in targets.items()):
            break
    assert t == H.verify_contour_reversal(g, s).details["steps"] == 64


def test_contour_reversal_rejects_plain_state():
    g = build_bidirected_grid(4, 4)
    with pytest.raises(H.HarnessError):
        H.verify_contour_reversal(g, WalkState(np.zeros(16, dtype=np.int64), 0))


def nested_rings_4x4():
    g = build_bidirected_grid(4, 4)
    rng = np.random.default_rng(7)
    m = H.multicycle_from_rings(g, [(0, 0, 3, 3), (1, 1, 2, 2)],
                                [True, False], rng)
    return g, m


def test_flip_ordering_on_nested_rings():
    g, m = nested_rings_4x4()
    rep = H.verify_reversal_ordering(g, m)
    assert rep.passed, rep.failed()
    times = rep.details["times"]
    assert len(times) == 12  # the 4x4 boundary ring
    assert times == sorted(times, reverse=True)
    assert times[-1] >= 1


def test_aux_unicycle_on_nested_rings():
    g, m = nested_rings_4x4()
    gs, state, orig = H.build_auxiliary_unicycle(m, g)
    assert is_eulerian(gs)
    assert is_unicycle(gs, state)
    # 12-ring + 4-ring + 2 primed vertices; middle is empty on 4x4
    assert gs.n == 18 and gs.edge_count == 54
    assert (orig >= 0).sum() == 16 and (orig < 0).sum() == 2
    rep = H.verify_aux_equivalence(g, m)
    assert rep.passed, rep.failed()


def test_domino_row_flip_ordering():
    g, row = H.build_domino_row_torus(5, 4, 1)
    rng = np.random.default_rng(3)
    s, dc = H.gen_domino_instance(g, row, rng)
    rep = H.verify_flip_ordering(g, s, dc)
    assert rep.passed, rep.failed()
    assert max(rep.details["times"]) <= g.edge_count


def test_gen_multicycle_layout(rng):
    g = build_bidirected_grid(12, 12)
    m = H.gen_multicycle(g, 3, rng)
    layout = H.analyze_multicycle(g, m)
    assert len(layout.cycles) == 3
    assert H.verify_multicycle_reversal(g, m).passed


def test_cw_internal_instances(rng):
    g = build_bidirected_grid(12, 12)
    for _ in range(3):
        m = H.gen_cw_internal_instance(g, rng)
        rep = H.verify_cw_internal(g, m)
        assert rep.passed, rep.failed()


def test_random_eulerian_digraphs_are_eulerian(rng):
    for _ in range(10):
        g = H.random_eulerian_digraph(rng, 24)
        assert g.n <= 24
        assert is_eulerian(g)
        ins = np.zeros(g.n, dtype=int)
        for v in range(g.n):
            for w in g.out(v):
                ins[w] += 1
        outs = np.array([g.degree(v) for v in range(g.n)])
        assert np.array_equal(ins, outs)


def test_run_suite_reports_failing_seeds(monkeypatch):
    calls = []

    def flaky(seed, grid):
        calls.append(seed)
        bad = len(calls) % 2 == 0
        return H.CheckReport("flaky", not bad,
                             {"claim": not bad}, {"seed": seed})

    monkeypatch.setitem(H.SUITES, "propA", flaky)
    res = H.run_suite("propA", 6, 123)
    assert res.failures == 3
    assert res.seeds == [calls[i] for i in (1, 3, 5)]
    assert "failed ['claim']" in res.first_failure


def test_run_suite_counts_generator_errors(monkeypatch):
    def broken(seed, grid):
        raise H.HarnessError("no instance")

    monkeypatch.setitem(H.SUITES, "propB", broken)
    res = H.run_suite("propB", 4, 1)
    assert res.failures == 4


def test_run_suite_unknown_name():
    with pytest.raises(KeyError):
        H.run_suite("nope", 1, 1)
