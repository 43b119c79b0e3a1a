"""Rotor-router stepping on finite digraphs.

One step: the chip at v advances v's rotor one position (clockwise on
embedded graphs) and moves along the new rotor edge.  The dynamics are
fully deterministic; all randomness lives in initial conditions.

Visit counts tally rotor advances, i.e. departures.  Over any closed
excursion (chip returns to where it started) departures equal arrivals
per vertex, which is the sense used by every full-turn assertion here.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .graphs import WalkState, check_state, is_eulerian, is_unicycle


class EngineError(RuntimeError):
    """Violated precondition or exhausted step budget."""


@dataclass(frozen=True)
class StepRecord:
    """One step of a recorded trajectory.  ``t`` is the 0-based index of
    the step; ``edge_index`` is the rotor position after the advance, so
    ``dst == g.out(src)[edge_index]``."""

    t: int
    src: int
    dst: int
    edge_index: int


@dataclass
class RunResult:
    state: WalkState
    counts: np.ndarray
    records: list[StepRecord] | None = None


def step(g, s):
    """One rotor-router step; returns a fresh state, input untouched."""
    v = s.chip
    d = g.degree(v)
    a = (int(s.rotors[v]) + 1) % d
    rotors = s.rotors.copy()
    rotors[v] = a
    return WalkState(rotors, int(g.out(v)[a]))


def run(g, s, n, record=False):
    """Run n steps from s.  Pure-Python reference loop; the numba kernels
    in _kernels must agree with it step for step."""
    if n < 0:
        raise EngineError("negative step count")
    check_state(g, s)
    offsets, targets = g.offsets, g.targets
    rotors = s.rotors.astype(np.int32, copy=True)
    chip = int(s.chip)
    counts = np.zeros(g.n, dtype=np.int64)
    records = [] if record else None
    for t in range(n):
        a = int(rotors[chip]) + 1
        if a == offsets[chip + 1] - offsets[chip]:
            a = 0
        rotors[chip] = a
        counts[chip] += 1
        nxt = int(targets[offsets[chip] + a])
        if record:
            records.append(StepRecord(t, chip, nxt, a))
        chip = nxt
    return RunResult(WalkState(rotors, chip), counts, records)


def dump_trajectory(records, dest):
    """Write records as tab-separated ``t from to edge_index`` lines."""
    own = isinstance(dest, (str, bytes))
    f = open(dest, "w") if own else dest
    try:
        f.write("t\tfrom\tto\tedge_index\n")
        for r in records:
            f.write(f"{r.t}\t{r.src}\t{r.dst}\t{r.edge_index}\n")
    finally:
        if own:
            f.close()


def load_trajectory(src):
    own = isinstance(src, (str, bytes))
    f = open(src) if own else src
    try:
        out = []
        for line in f:
            line = line.strip()
            if not line or line.startswith("t\t"):
                continue
            t, a, b, e = line.split("\t")
            out.append(StepRecord(int(t), int(a), int(b), int(e)))
        return out
    finally:
        if own:
            f.close()


@dataclass
class RecurrenceResult:
    """Outcome of cycle detection on the state orbit.

    ``recurrent_at`` is the first return time to the initial state (None
    when the orbit never returns); ``transient_prefix`` is the number of
    steps before the orbit enters its limit cycle (0 when recurrent).
    ``limit_state`` is the first state on the limit cycle.
    """

    recurrent_at: int | None
    transient_prefix: int
    period: int
    limit_state: WalkState
    steps_examined: int


def _advance(offsets, targets, rotors, chip, n):
    for _ in range(n):
        a = int(rotors[chip]) + 1
        if a == offsets[chip + 1] - offsets[chip]:
            a = 0
        rotors[chip] = a
        chip = int(targets[offsets[chip] + a])
    return chip


def detect_recurrence(g, s, max_steps=None):
    """Brent cycle detection on the deterministic state orbit.

    Returns the orbit's transient length and period.  On Eulerian graphs
    recurrent states are exactly unicycles and the period is |E|.
    """
    check_state(g, s)
    if max_steps is None:
        max_steps = 4 * g.edge_count * g.n + 16
    offsets, targets = g.offsets, g.targets

    t_rot = s.rotors.astype(np.int32, copy=True)
    t_chip = int(s.chip)
    h_rot = t_rot.copy()
    h_chip = _advance(offsets, targets, h_rot, t_chip, 1)
    power = lam = 1
    total = 1
    while not (h_chip == t_chip and np.array_equal(h_rot, t_rot)):
        if power == lam:
            t_rot = h_rot.copy()
            t_chip = h_chip
            power *= 2
            lam = 0
        h_chip = _advance(offsets, targets, h_rot, h_chip, 1)
        lam += 1
        total += 1
        if total > max_steps:
            raise EngineError(f"no recurrence within {max_steps} steps")

    a_rot = s.rotors.astype(np.int32, copy=True)
    a_chip = int(s.chip)
    b_rot = s.rotors.astype(np.int32, copy=True)
    b_chip = _advance(offsets, targets, b_rot, int(s.chip), lam)
    mu = 0
    while not (a_chip == b_chip and np.array_equal(a_rot, b_rot)):
        a_chip = _advance(offsets, targets, a_rot, a_chip, 1)
        b_chip = _advance(offsets, targets, b_rot, b_chip, 1)
        mu += 1
        if mu > max_steps:
            raise EngineError("lost the limit cycle; graph mutated?")

    return RecurrenceResult(
        recurrent_at=lam if mu == 0 else None,
        transient_prefix=mu,
        period=lam,
        limit_state=WalkState(a_rot, a_chip),
        steps_examined=total + lam + 2 * mu,
    )


@dataclass
class EulerTourReport:
    passed: bool
    steps: int
    edges_once: bool
    returned_to_start: bool
    counts_match_degrees: bool
    first_duplicate_edge: tuple[int, int, int] | None = None  # (t, vertex, rotor)


def verify_euler_tour(g, s):
    """From a unicycle state on an Eulerian digraph, run exactly |E| steps
    and check the walk is a closed Euler tour: every edge used once, every
    vertex departed deg(v) times, state back to the start."""
    check_state(g, s)
    if not is_eulerian(g):
        raise EngineError("euler tour check needs an Eulerian digraph")
    if not is_unicycle(g, s):
        raise EngineError("euler tour check needs a unicycle state")
    m = g.edge_count
    offsets, targets = g.offsets, g.targets
    rotors = s.rotors.astype(np.int32, copy=True)
    chip = int(s.chip)
    counts = np.zeros(g.n, dtype=np.int64)
    used = np.zeros(m, dtype=bool)
    dup = None
    for t in range(m):
        a = int(rotors[chip]) + 1
        if a == offsets[chip + 1] - offsets[chip]:
            a = 0
        rotors[chip] = a
        counts[chip] += 1
        e = int(offsets[chip]) + a
        if used[e] and dup is None:
            dup = (t, chip, a)
        used[e] = True
        chip = int(targets[e])

    edges_once = bool(used.all()) and dup is None
    returned = chip == s.chip and np.array_equal(rotors, s.rotors)
    degs = (offsets[1:] - offsets[:-1]).astype(np.int64)
    counts_ok = np.array_equal(counts, degs)
    return EulerTourReport(
        passed=edges_once and returned and counts_ok,
        steps=m,
        edges_once=edges_once,
        returned_to_start=returned,
        counts_match_degrees=counts_ok,
        first_duplicate_edge=dup,
    )
