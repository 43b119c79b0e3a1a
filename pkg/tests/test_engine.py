import io

import numpy as np
import pytest

from rotorwalk import _kernels as K
from rotorwalk.engine import (EngineError, StepRecord, detect_recurrence,
                              dump_trajectory, load_trajectory, run, step,
                              verify_euler_tour)
from rotorwalk.graphs import (WalkState, build_bidirected_grid,
                              build_bidirected_torus, is_unicycle)


def ring_state(g):
    """Unicycle on the 2x2 grid: rotors trace 0 -> 1 -> 3 -> 2 -> 0."""
    rotors = np.zeros(4, dtype=np.int64)
    rotors[0] = g.edge_index(0, 1)
    rotors[1] = g.edge_index(1, 3)
    rotors[3] = g.edge_index(3, 2)
    rotors[2] = g.edge_index(2, 0)
    return WalkState(rotors, 0)


def test_run_matches_hand_trace():
    # 2x2 grid, all rotors 0, chip at 0: advancing each rotor before the
    # move gives the visit order worked out by hand
    g = build_bidirected_grid(2, 2)
    s = WalkState(np.zeros(4, dtype=np.int64), 0)
    res = run(g, s, 6, record=True)
    assert [r.dst for r in res.records] == [1, 0, 2, 0, 1, 3]
    assert [r.src for r in res.records] == [0, 1, 0, 2, 0, 1]
    assert [r.edge_index for r in res.records] == [1, 1, 0, 1, 1, 0]
    assert res.state.chip == 3
    assert list(res.counts) == [3, 2, 1, 0]
    # departure counts sum to the number of steps
    assert res.counts.sum() == 6


def test_run_leaves_input_state_alone():
    g = build_bidirected_grid(2, 2)
    s = WalkState(np.zeros(4, dtype=np.int64), 0)
    run(g, s, 10)
    assert s.chip == 0 and not s.rotors.any()
    with pytest.raises(EngineError):
        run(g, s, -1)


def test_single_step_agrees_with_run():
    g = build_bidirected_grid(3, 3)
    s = WalkState(np.zeros(9, dtype=np.int64), 4)
    cur = s
    for _ in range(25):
        cur = step(g, cur)
    assert run(g, s, 25).state == cur


def test_run_agrees_with_kernel_trace(rng):
    g = build_bidirected_torus(4, 4)
    for _ in range(5):
        rotors = rng.integers(0, 4, size=16)
        chip = int(rng.integers(0, 16))
        res = run(g, WalkState(rotors.copy(), chip), 500, record=True)
        alpha = rotors.astype(np.int32)
        trace = np.zeros(500, dtype=np.int64)
        K.finite_run_trace(g.offsets, g.targets, alpha, chip, trace)
        assert [r.dst for r in res.records] == trace.tolist()


def test_trajectory_round_trip(tmp_path):
    g = build_bidirected_grid(3, 2)
    res = run(g, WalkState(np.zeros(6, dtype=np.int64), 0), 40, record=True)
    path = tmp_path / "traj.tsv"
    dump_trajectory(res.records, str(path))
    assert load_trajectory(str(path)) == res.records
    buf = io.StringIO()
    dump_trajectory(res.records, buf)
    buf.seek(0)
    assert load_trajectory(buf) == res.records


def test_recurrence_from_unicycle():
    g = build_bidirected_grid(2, 2)
    res = detect_recurrence(g, ring_state(g))
    assert res.recurrent_at == g.edge_count == 8
    assert res.transient_prefix == 0
    assert res.period == 8


def test_recurrence_from_transient_state():
    g = build_bidirected_grid(2, 2)
    s = WalkState(np.zeros(4, dtype=np.int64), 0)
    assert not is_unicycle(g, s)
    res = detect_recurrence(g, s)
    assert res.recurrent_at is None
    assert res.transient_prefix > 0
    assert res.period == 8  # Eulerian: the limit cycle is one Euler tour
    assert is_unicycle(g, res.limit_state)


def test_euler_tour_on_unicycle():
    g = build_bidirected_grid(2, 2)
    rep = verify_euler_tour(g, ring_state(g))
    assert rep.passed and rep.steps == 8
    assert rep.edges_once and rep.returned_to_start and rep.counts_match_degrees


def test_euler_tour_rejects_non_unicycle():
    g = build_bidirected_grid(2, 2)
    with pytest.raises(EngineError):
        verify_euler_tour(g, WalkState(np.zeros(4, dtype=np.int64), 0))


def test_step_record_fields():
    r = StepRecord(3, 1, 2, 0)
    assert (r.t, r.src, r.dst, r.edge_index) == (3, 1, 2, 0)
