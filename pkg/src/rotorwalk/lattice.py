"""Rotor walk on the unbounded square lattice with contour label events.

Every cell starts with a pseudo-random rotor direction computed on demand
from (seed, x, y) by a counter-based generator, so the infinite plane needs
no storage up front and any run is reproducible from its seed.  After each
step the walker follows rotors from the chip; if they close a clockwise
cycle of length >= 3 through the chip, a label event opens at the chip's
cell, the entry vertex.  While the event is open the walker watches for
its reversal witness: a step after which the chip sits at the entry
vertex and every contour vertex's rotor points at its contour
predecessor, i.e. the recorded cycle now runs anticlockwise.  The event
closes at the first step that leaves the closed region (contour plus
strict interior); the recorded ``t_out`` is the step before that one,
the last step of the interior visit, so [t_in, t_out] is exactly the
time spent on or inside the contour.  A close without a prior witness
raises immediately with the seed and step for replay.  The exit step
usually departs from the entry vertex, but not always: a concave entry
corner has no edge leading out of the region, and an entry vertex whose
rotor sweep meets another contour vertex before the first exterior edge
sends the chip back inside; such exits are counted per run as
``offsite_exits``.

Times are counted in completed steps (the first step has t = 1).  A
nested event's depth is the number of episodes already open when it
starts.  Episodes still open when the step budget ends produce no label.

Checkpoint format (magic ``RRWK1``, version 1, little-endian): header
``magic(5s) version(u8) mode(u8) record_contours(u8)``, then ``seed(u64)
steps(i64)``, the int64 register file, then length-prefixed arrays in
order: dirs(int8), cnts(int32), the int64 episode-stack columns, contour
pool, schedule, sampled x, sampled y, eight int64 event columns for
events flushed so far, recorded contours (int64, concatenated, with an
extra length column), and a trailing sha256 of everything before it.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from ._kernels import initial_direction, mix64
from .geometry import PointLocation, point_in_polygon, signed_area2

DIR_NAMES = "NESW"
DX = (0, 1, 0, -1)
DY = (1, 0, -1, 0)

CHAIN_HARD_CAP = 1_000_000  # hops; a longer detection chain aborts the run


class WeakReversibilityError(RuntimeError):
    """An episode closed although the chip was never seen back at the
    entry vertex with the recorded contour pointwise reversed."""

    def __init__(self, seed, t, where):
        self.seed = seed
        self.t = t
        self.where = where
        super().__init__(f"episode closed without a reversal witness at "
                         f"step {t}, entry vertex {where} (seed {seed})")


class DetectionCapError(RuntimeError):
    """A detection chain exceeded the hard length cap."""


class CheckpointError(RuntimeError):
    """Unreadable, corrupt, or mismatched checkpoint file."""


# -- environment ----------------------------------------------------------------


@dataclass(frozen=True)
class CellState:
    direction: int
    visits: int


class LatticeEnvironment:
    """Sparse view of the plane: cells materialize on first query.

    ``direction(x, y)`` is the cell's current rotor; ``visits`` counts how
    many times the chip has departed the cell (its rotor equals the
    initial direction advanced ``visits`` times, modulo 4).
    """

    def __init__(self, seed):
        self.seed = int(seed)
        self._cells = {}

    def direction(self, x, y):
        c = self._cells.get((x, y))
        if c is None:
            c = [initial_direction(self.seed, x, y), 0]
            self._cells[(x, y)] = c
        return c[0]

    def advance(self, x, y):
        """Rotate the cell's rotor clockwise and count the departure."""
        d = (self.direction(x, y) + 1) & 3
        c = self._cells[(x, y)]
        c[0] = d
        c[1] += 1
        return d

    def visits(self, x, y):
        c = self._cells.get((x, y))
        return 0 if c is None else c[1]

    def cell(self, x, y):
        return CellState(self.direction(x, y), self.visits(x, y))

    def materialized(self):
        """Iterator of ((x, y), CellState) over queried cells."""
        for xy, (d, v) in self._cells.items():
            yield xy, CellState(d, v)


def detect_contour(env, chip):
    """Follow rotors from the chip until the chain returns to it (returns
    the cycle as an (L, 2) array when L >= 3, else None) or revisits any
    earlier cell (a dead chain, None).  Cells touched are materialized."""
    cx, cy = chip
    seen = set()
    chain = []
    x, y = cx, cy
    while True:
        if len(chain) >= CHAIN_HARD_CAP:
            raise DetectionCapError(f"chain exceeded {CHAIN_HARD_CAP} hops")
        seen.add((x, y))
        chain.append((x, y))
        d = env.direction(x, y)
        nx, ny = x + DX[d], y + DY[d]
        if (nx, ny) == (cx, cy):
            if len(chain) >= 3:
                return np.array(chain, dtype=np.int64)
            return None
        if (nx, ny) in seen:
            return None
        x, y = nx, ny


def sim_step(env, chip):
    """One rotor step followed by contour detection at the new position.

    Returns (new_chip, contour) where contour is the clockwise cycle
    through the new chip if one now exists (an (L, 2) array), else None.
    """
    x, y = chip
    d = env.advance(x, y)
    new = (x + DX[d], y + DY[d])
    cyc = detect_contour(env, new)
    if cyc is not None and signed_area2(cyc) < 0:
        return new, cyc
    return new, None


# -- traces ----------------------------------------------------------------------


@dataclass(frozen=True)
class LabelEvent:
    """One completed clockwise-contour episode."""

    k: int
    x: int
    y: int
    t_in: int          # step whose arrival created the clockwise contour
    t_out: int         # last step on or inside it; outside from t_out + 1
    length: int
    area2: int
    depth: int
    contour: np.ndarray | None = None

    @property
    def vertex(self):
        return (self.x, self.y)

    @property
    def area(self):
        """Signed enclosed area (negative: the contour runs clockwise)."""
        return self.area2 // 2


_EV_COLS = ("k", "x", "y", "t_in", "t_out", "len", "area2", "depth")


@dataclass
class WalkTrace:
    """Arrays-of-columns record of one walk."""

    seed: int
    steps: int
    mode: str
    ev: dict = field(default_factory=dict)          # int64 column per _EV_COLS
    contours: list | None = None                    # aligned with event rows
    sample_t: np.ndarray = None
    sample_x: np.ndarray = None
    sample_y: np.ndarray = None
    counters: dict = field(default_factory=dict)
    state: dict | None = None

    @property
    def n_labels(self):
        return 0 if not self.ev else int(self.ev["k"].shape[0])

    def labels(self):
        out = []
        for i in range(self.n_labels):
            out.append(LabelEvent(
                *(int(self.ev[c][i]) for c in _EV_COLS),
                contour=None if self.contours is None else self.contours[i]))
        return out

    def sample_r2(self):
        return self.sample_x.astype(np.float64) ** 2 + self.sample_y.astype(np.float64) ** 2

    # -- file formats ------------------------------------------------------

    def write_events_jsonl(self, path):
        """One JSON object per label: k, x, y, t_in, t_out, len, area,
        depth.  ``area`` is the exact signed enclosed area (an integer for
        lattice contours; negative means clockwise)."""
        with open(path, "w") as f:
            for i in range(self.n_labels):
                row = {
                    "k": int(self.ev["k"][i]),
                    "x": int(self.ev["x"][i]),
                    "y": int(self.ev["y"][i]),
                    "t_in": int(self.ev["t_in"][i]),
                    "t_out": int(self.ev["t_out"][i]),
                    "len": int(self.ev["len"][i]),
                    "area": int(self.ev["area2"][i]) // 2,
                    "depth": int(self.ev["depth"][i]),
                }
                f.write(json.dumps(row, separators=(",", ":")) + "\n")

    def write_samples_csv(self, path):
        with open(path, "w") as f:
            f.write("t,x,y,r2\n")
            for i in range(self.sample_t.shape[0]):
                x = int(self.sample_x[i])
                y = int(self.sample_y[i])
                f.write(f"{int(self.sample_t[i])},{x},{y},{x * x + y * y}\n")


def read_events_jsonl(path):
    """Event columns from a JSONL file, as int64 arrays keyed like
    WalkTrace.ev (area restored to the doubled form)."""
    rows = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    ev = {}
    for col in _EV_COLS:
        src = "area2" if col == "area2" else col
        if col == "area2":
            ev[col] = np.array([2 * r["area"] for r in rows], dtype=np.int64)
        else:
            ev[col] = np.array([r[src] for r in rows], dtype=np.int64)
    return ev


def read_samples_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)
    if data.size == 0:
        z = np.zeros(0, dtype=np.int64)
        return z, z.copy(), z.copy()
    return data[:, 0], data[:, 1], data[:, 2]


def load_trace(events_path, samples_path, seed=-1, steps=-1, mode="rotor"):
    ev = read_events_jsonl(events_path)
    t, x, y = read_samples_csv(samples_path)
    return WalkTrace(seed=seed, steps=steps, mode=mode, ev=ev,
                     sample_t=t, sample_x=x, sample_y=y)


def build_sample_schedule(steps, base=1.05):
    """Geometric sample times 1, ..., steps (deduplicated, includes the
    final step)."""
    if steps <= 0:
        return np.zeros(0, dtype=np.int64)
    ts = []
    v = 1.0
    while round(v) <= steps:
        ts.append(round(v))
        v *= base
    ts.append(steps)
    return np.unique(np.array(ts, dtype=np.int64))


# -- fast walker ------------------------------------------------------------------


class _FastWalker:
    """Owns the kernel state and drives lattice_walk via its status codes."""

    def __init__(self, seed, steps, schedule, record_contours=False, box_side=256):
        self.seed = int(seed) & K.U64_MASK
        self.steps = int(steps)
        self.record_contours = bool(record_contours)
        self.useed = np.uint64(self.seed)
        sched = (np.zeros(0, dtype=np.int64) if schedule is None
                 else np.asarray(schedule, dtype=np.int64))
        if sched.size and (np.any(np.diff(sched) <= 0) or sched[0] < 1):
            raise ValueError("sample schedule must be strictly increasing, >= 1")
        self.sched = sched
        self.samp_x = np.zeros(sched.shape[0], dtype=np.int64)
        self.samp_y = np.zeros(sched.shape[0], dtype=np.int64)

        self.regs = np.zeros(K.R_NREGS, dtype=np.int64)
        self.regs[K.R_KCOUNT] = 1
        self._alloc_box(box_side)
        self._alloc_stack(256)
        self.pool = np.zeros(1 << 14, dtype=np.int64)
        self.chain = np.zeros(2 << 13, dtype=np.int64)
        cap = 1 << 14
        self.ev = {c: np.zeros(cap, dtype=np.int64) for c in _EV_COLS}
        self.ev_coff = np.zeros(cap, dtype=np.int64)
        self.ev_clen = np.zeros(cap, dtype=np.int64)
        self.co_pool = np.zeros(1 << 16 if record_contours else 1, dtype=np.int64)
        self._flushed = {c: [] for c in _EV_COLS}
        self._contours = [] if record_contours else None

    def _alloc_box(self, side):
        self.dirs = np.full(side * side, -1, dtype=np.int8)
        self.cnts = np.zeros(side * side, dtype=np.int32)
        self.epochs = np.zeros(side * side, dtype=np.int64)
        self.regs[K.R_OX] = -(side // 2)
        self.regs[K.R_OY] = -(side // 2)
        self.regs[K.R_W] = side
        self.regs[K.R_H] = side

    _STACK_COLS = ("vx", "vy", "tin", "k", "off", "len", "area2", "rev")

    def _alloc_stack(self, cap):
        self.st = {name: np.zeros(cap, dtype=np.int64)
                   for name in self._STACK_COLS}

    # -- status handlers ---------------------------------------------------

    def _grow_box(self):
        r = self.regs
        need = max(abs(int(r[K.R_GX])), abs(int(r[K.R_GY])),
                   abs(int(r[K.R_CX])), abs(int(r[K.R_CY])))
        side = int(r[K.R_W])
        new = side
        while new // 2 - 18 < need:
            new *= 2
        old_dirs = self.dirs.reshape(side, side)
        old_cnts = self.cnts.reshape(side, side)
        ox, oy = int(r[K.R_OX]), int(r[K.R_OY])
        self._alloc_box(new)
        x0 = ox - int(r[K.R_OX])
        y0 = oy - int(r[K.R_OY])
        self.dirs.reshape(new, new)[y0:y0 + side, x0:x0 + side] = old_dirs
        self.cnts.reshape(new, new)[y0:y0 + side, x0:x0 + side] = old_cnts
        # epochs deliberately reset: serials are never reused, so stale
        # marks can only be lost, never falsely matched

    def _flush_events(self):
        n = int(self.regs[K.R_EV])
        for c in _EV_COLS:
            self._flushed[c].append(self.ev[c][:n].copy())
        if self._contours is not None:
            for i in range(n):
                off = int(self.ev_coff[i])
                ln = int(self.ev_clen[i])
                self._contours.append(
                    self.co_pool[off:off + 2 * ln].reshape(ln, 2).copy())
        self.regs[K.R_EV] = 0
        self.regs[K.R_CO] = 0

    def _grow_stack(self):
        cap = self.st["vx"].shape[0]
        old = self.st
        self._alloc_stack(cap * 2)
        n = int(self.regs[K.R_STACK])
        for name in self.st:
            self.st[name][:n] = old[name][:n]

    def _grow_pool(self):
        new = np.zeros(self.pool.shape[0] * 2, dtype=np.int64)
        used = int(self.regs[K.R_POOL])
        new[:used] = self.pool[:used]
        self.pool = new

    def _grow_chain(self):
        cap = self.chain.shape[0]
        if cap >= 2 * CHAIN_HARD_CAP:
            raise DetectionCapError(
                f"detection chain exceeded {CHAIN_HARD_CAP} hops "
                f"(seed {self.seed}, step {int(self.regs[K.R_T])})")
        self.chain = np.concatenate(
            [self.chain, np.zeros(cap, dtype=np.int64)])

    def _grow_co(self):
        # contours referenced by buffered events; flushing resets both
        if int(self.regs[K.R_EV]) > 0:
            self._flush_events()
        need = int(self.regs[K.R_POOL]) + 16
        cap = self.co_pool.shape[0]
        while cap < need:
            cap *= 2
        if cap != self.co_pool.shape[0]:
            self.co_pool = np.zeros(cap, dtype=np.int64)

    def drive(self, t_target):
        self.regs[K.R_TTARGET] = min(int(t_target), self.steps)
        while True:
            st = K.lattice_walk(
                self.useed, self.regs, self.dirs, self.cnts, self.epochs,
                self.st["vx"], self.st["vy"], self.st["tin"], self.st["k"],
                self.st["off"], self.st["len"], self.st["area2"],
                self.st["rev"], self.pool, self.chain,
                self.ev["k"], self.ev["x"], self.ev["y"], self.ev["t_in"],
                self.ev["t_out"], self.ev["len"], self.ev["area2"],
                self.ev["depth"], self.ev_coff, self.ev_clen,
                self.co_pool, np.int64(1 if self.record_contours else 0),
                self.sched, self.samp_x, self.samp_y)
            if st == K.ST_DONE:
                return
            if st == K.ST_GROW:
                self._grow_box()
            elif st == K.ST_EV_FULL:
                self._flush_events()
            elif st == K.ST_STACK_FULL:
                self._grow_stack()
            elif st == K.ST_POOL_FULL:
                self._grow_pool()
            elif st == K.ST_CHAIN_FULL:
                self._grow_chain()
            elif st == K.ST_CO_FULL:
                self._grow_co()
            elif st == K.ST_VIOLATION:
                r = self.regs
                raise WeakReversibilityError(
                    self.seed, int(r[K.R_VT]),
                    (int(r[K.R_VX]), int(r[K.R_VY])))
            else:
                raise RuntimeError(f"unknown kernel status {st}")

    # -- output ------------------------------------------------------------

    def finish(self, include_state=False):
        self._flush_events()
        ev = {}
        for c in _EV_COLS:
            ev[c] = (np.concatenate(self._flushed[c]) if self._flushed[c]
                     else np.zeros(0, dtype=np.int64))
        order = np.argsort(ev["k"], kind="stable")
        for c in _EV_COLS:
            ev[c] = ev[c][order]
        contours = None
        if self._contours is not None:
            contours = [self._contours[i] for i in order]
        ns = int(self.regs[K.R_NEXT_SAMPLE])
        r = self.regs
        counters = {
            "detections": int(r[K.R_SERIAL]),
            "chain_hops": int(r[K.R_HOPS]),
            "max_chain": int(r[K.R_MAXCHAIN]),
            "max_depth": int(r[K.R_MAXDEPTH]),
            "open_episodes_at_end": int(r[K.R_STACK]),
            "offsite_exits": int(r[K.R_OFFEXITS]),
            "box_side": int(r[K.R_W]),
        }
        trace = WalkTrace(
            seed=self.seed, steps=int(r[K.R_T]), mode="rotor", ev=ev,
            contours=contours,
            sample_t=self.sched[:ns].copy(),
            sample_x=self.samp_x[:ns].copy(),
            sample_y=self.samp_y[:ns].copy(),
            counters=counters)
        if include_state:
            trace.state = self._snapshot_cells()
        return trace

    def _snapshot_cells(self):
        side = int(self.regs[K.R_W])
        ox, oy = int(self.regs[K.R_OX]), int(self.regs[K.R_OY])
        cells = {}
        touched = np.flatnonzero((self.dirs >= 0) | (self.cnts > 0))
        for idx in touched.tolist():
            y, x = divmod(idx, side)
            cells[(ox + x, oy + y)] = (int(self.dirs[idx]), int(self.cnts[idx]))
        return {"chip": (int(self.regs[K.R_CX]), int(self.regs[K.R_CY])),
                "cells": cells}

    # -- checkpointing -------------------------------------------------------

    def to_bytes(self):
        self._flush_events()
        parts = [struct.pack("<5sBBB", b"RRWK1", 1, 0,
                             1 if self.record_contours else 0),
                 struct.pack("<Qq", self.seed, self.steps)]

        def arr(a):
            parts.append(struct.pack("<q", a.nbytes))
            parts.append(a.tobytes())

        arr(self.regs)
        arr(self.dirs)
        arr(self.cnts)
        n = int(self.regs[K.R_STACK])
        for name in self._STACK_COLS:
            arr(self.st[name][:n])
        arr(self.pool[:int(self.regs[K.R_POOL])])
        arr(self.sched)
        ns = int(self.regs[K.R_NEXT_SAMPLE])
        arr(self.samp_x[:ns])
        arr(self.samp_y[:ns])
        flushed = {c: (np.concatenate(self._flushed[c]) if self._flushed[c]
                       else np.zeros(0, dtype=np.int64)) for c in _EV_COLS}
        for c in _EV_COLS:
            arr(flushed[c])
        if self.record_contours:
            lens = np.array([len(c) for c in self._contours], dtype=np.int64)
            flat = (np.concatenate([c.reshape(-1) for c in self._contours])
                    if self._contours else np.zeros(0, dtype=np.int64))
            arr(lens)
            arr(flat)
        blob = b"".join(parts)
        return blob + hashlib.sha256(blob).digest()

    def save(self, path):
        tmp = f"{path}.tmp"
        with open(tmp, "wb") as f:
            f.write(self.to_bytes())
        os.replace(tmp, path)

    @classmethod
    def from_bytes(cls, data):
        if len(data) < 40 or hashlib.sha256(data[:-32]).digest() != data[-32:]:
            raise CheckpointError("checksum mismatch: corrupt checkpoint")
        body = memoryview(data[:-32])
        magic, version, mode, rec = struct.unpack_from("<5sBBB", body, 0)
        if magic != b"RRWK1" or version != 1:
            raise CheckpointError("not a version-1 RRWK1 checkpoint")
        if mode != 0:
            raise CheckpointError("unsupported walk mode in checkpoint")
        off = 8
        seed, steps = struct.unpack_from("<Qq", body, off)
        off += 16
        pos = [off]

        def arr(dtype):
            (nbytes,) = struct.unpack_from("<q", body, pos[0])
            pos[0] += 8
            a = np.frombuffer(body, dtype=dtype, count=nbytes // np.dtype(dtype).itemsize,
                              offset=pos[0]).copy()
            pos[0] += nbytes
            return a

        regs = arr(np.int64)
        w = cls.__new__(cls)
        w.seed = seed
        w.steps = steps
        w.record_contours = bool(rec)
        w.useed = np.uint64(seed)
        w.regs = np.zeros(K.R_NREGS, dtype=np.int64)
        w.regs[:regs.shape[0]] = regs
        side = int(w.regs[K.R_W])
        w.dirs = arr(np.int8)
        w.cnts = arr(np.int32)
        w.epochs = np.zeros(side * side, dtype=np.int64)
        nstack = int(w.regs[K.R_STACK])
        w.st = {}
        cap = max(256, 2 * nstack)
        for name in cls._STACK_COLS:
            col = arr(np.int64)
            full = np.zeros(cap, dtype=np.int64)
            full[:nstack] = col
            w.st[name] = full
        pool_used = int(w.regs[K.R_POOL])
        pool = arr(np.int64)
        pcap = 1 << 14
        while pcap < pool_used:
            pcap *= 2
        w.pool = np.zeros(pcap, dtype=np.int64)
        w.pool[:pool_used] = pool
        w.sched = arr(np.int64)
        ns = int(w.regs[K.R_NEXT_SAMPLE])
        w.samp_x = np.zeros(w.sched.shape[0], dtype=np.int64)
        w.samp_y = np.zeros(w.sched.shape[0], dtype=np.int64)
        w.samp_x[:ns] = arr(np.int64)
        w.samp_y[:ns] = arr(np.int64)
        w._flushed = {}
        for c in _EV_COLS:
            col = arr(np.int64)
            w._flushed[c] = [col] if col.size else []
        if w.record_contours:
            lens = arr(np.int64)
            flat = arr(np.int64)
            w._contours = []
            at = 0
            for ln in lens.tolist():
                w._contours.append(flat[at:at + 2 * ln].reshape(ln, 2).copy())
                at += 2 * ln
        else:
            w._contours = None
        w.chain = np.zeros(2 << 13, dtype=np.int64)
        evcap = 1 << 14
        w.ev = {c: np.zeros(evcap, dtype=np.int64) for c in _EV_COLS}
        w.ev_coff = np.zeros(evcap, dtype=np.int64)
        w.ev_clen = np.zeros(evcap, dtype=np.int64)
        w.co_pool = np.zeros(1 << 16 if w.record_contours else 1, dtype=np.int64)
        w.regs[K.R_EV] = 0
        w.regs[K.R_CO] = 0
        return w

    @classmethod
    def load(cls, path):
        with open(path, "rb") as f:
            return cls.from_bytes(f.read())


def run_walk(seed, steps, sample_schedule=None, *, record_contours=False,
             checkpoint_every=None, checkpoint_path=None, resume_from=None,
             include_state=False, engine="fast"):
    """Run a rotor walk for ``steps`` steps from a fresh origin chip.

    ``sample_schedule`` is a strictly increasing int array of times at
    which the chip position is recorded.  With ``checkpoint_every`` the
    walker state is saved to ``checkpoint_path`` at every multiple (and at
    the end); ``resume_from`` restores such a file and continues, which
    yields bit-identical results to an uninterrupted run.
    ``engine="reference"`` uses the pure-Python walker (slow; small steps
    only).
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if engine == "reference":
        if resume_from or checkpoint_every:
            raise ValueError("checkpointing needs the fast engine")
        return run_walk_reference(seed, steps, sample_schedule,
                                  record_contours=record_contours,
                                  include_state=include_state)
    if resume_from:
        w = _FastWalker.load(resume_from)
        if (seed is not None and (int(seed) & K.U64_MASK) != w.seed):
            raise CheckpointError("checkpoint was written by a different seed")
        if steps < int(w.regs[K.R_T]):
            raise CheckpointError("checkpoint is already past the requested steps")
        w.steps = int(steps)
    else:
        w = _FastWalker(seed, steps, sample_schedule, record_contours)
    if checkpoint_every:
        if not checkpoint_path:
            raise ValueError("checkpoint_every needs checkpoint_path")
        t = int(w.regs[K.R_T])
        while t < steps:
            t = min(steps, (t // checkpoint_every + 1) * checkpoint_every)
            w.drive(t)
            w.save(checkpoint_path)
    else:
        w.drive(steps)
        if checkpoint_path:
            w.save(checkpoint_path)
    return w.finish(include_state=include_state)


def run_random_walk_control(seed, steps, sample_schedule=None):
    """Simple random walk with the same sampling interface, as the
    diffusive baseline."""
    sched = (np.zeros(0, dtype=np.int64) if sample_schedule is None
             else np.asarray(sample_schedule, dtype=np.int64))
    sx = np.zeros(sched.shape[0], dtype=np.int64)
    sy = np.zeros(sched.shape[0], dtype=np.int64)
    K.random_walk(np.uint64(int(seed) & K.U64_MASK), steps, sched, sx, sy)
    ns = int(np.searchsorted(sched, steps, side="right"))
    return WalkTrace(seed=int(seed) & K.U64_MASK, steps=steps, mode="random",
                     ev={c: np.zeros(0, dtype=np.int64) for c in _EV_COLS},
                     sample_t=sched[:ns].copy(), sample_x=sx[:ns], sample_y=sy[:ns])


def run_torus_walk(seed, size, steps):
    """Rotor walk on a size x size torus from (0, 0).  Returns (trace,
    dirs): trace[t] is the row-major vertex id after step t+1, dirs the
    final per-cell rotor directions (-1 where never queried)."""
    dirs = np.full(size * size, -1, dtype=np.int8)
    trace = np.zeros(steps, dtype=np.int64)
    K.torus_walk(np.uint64(int(seed) & K.U64_MASK), size, steps, dirs, trace)
    return trace, dirs


# -- pure-Python reference walker -------------------------------------------------


def _inside_or_on_py(q, poly):
    return point_in_polygon(q, poly) is not PointLocation.OUTSIDE


def run_walk_reference(seed, steps, sample_schedule=None, *,
                       record_contours=False, include_state=False):
    """Readable mirror of the fast walker; must match it event for event.

    Uses the general exact point-in-polygon predicate rather than the
    kernel's unit-edge specialization, so the two engines cross-check
    each other's geometry as well.
    """
    env = LatticeEnvironment(int(seed) & K.U64_MASK)
    sched = (np.zeros(0, dtype=np.int64) if sample_schedule is None
             else np.asarray(sample_schedule, dtype=np.int64))
    chip = (0, 0)
    stack = []  # open episodes: dict(vertex, t_in, k, contour, area2, rev)
    rows = {c: [] for c in _EV_COLS}
    contours = [] if record_contours else None
    samp = []
    ns = 0
    next_k = 1
    detections = 0
    offsite = 0
    for t in range(1, steps + 1):
        prev = chip
        x, y = chip
        d = env.advance(x, y)
        chip = (x + DX[d], y + DY[d])
        if ns < sched.shape[0] and sched[ns] == t:
            samp.append((t, chip[0], chip[1]))
            ns += 1
        # close episodes the chip has strictly left; the reversal must have
        # been witnessed while the episode was open, but the exit step may
        # start away from the entry vertex (a concave entry corner has no
        # exterior edge, so the chip must leave elsewhere)
        while stack:
            top = stack[-1]
            if _inside_or_on_py(chip, top["contour"]):
                break
            if not top["rev"]:
                raise WeakReversibilityError(env.seed, t, top["vertex"])
            if prev != top["vertex"]:
                offsite += 1
            stack.pop()
            rows["k"].append(top["k"])
            rows["x"].append(top["vertex"][0])
            rows["y"].append(top["vertex"][1])
            rows["t_in"].append(top["t_in"])
            rows["t_out"].append(t - 1)
            rows["len"].append(len(top["contour"]))
            rows["area2"].append(top["area2"])
            rows["depth"].append(len(stack))
            if contours is not None:
                contours.append(top["contour"].copy())
        # reversal witness: chip back at an entry vertex and every contour
        # vertex's rotor points at its contour predecessor
        for ep in stack:
            if not ep["rev"] and chip == ep["vertex"]:
                poly = ep["contour"]
                ok = True
                for i in range(len(poly)):
                    bx, by = poly[i]
                    ax, ay = poly[i - 1]
                    want = _dir_code(int(bx), int(by), int(ax), int(ay))
                    if env.direction(int(bx), int(by)) != want:
                        ok = False
                        break
                if ok:
                    ep["rev"] = True
        detections += 1
        cyc = detect_contour(env, chip)
        if cyc is not None:
            a2 = signed_area2(cyc)
            if a2 < 0:
                stack.append({"vertex": chip, "t_in": t, "k": next_k,
                              "contour": cyc, "area2": a2, "rev": False})
                next_k += 1
    order = np.argsort(np.array(rows["k"], dtype=np.int64), kind="stable")
    ev = {c: np.array(rows[c], dtype=np.int64)[order] for c in _EV_COLS}
    if contours is not None:
        contours = [contours[i] for i in order]
    samp = np.array(samp, dtype=np.int64).reshape(-1, 3)
    trace = WalkTrace(seed=env.seed, steps=steps, mode="rotor", ev=ev,
                      contours=contours,
                      sample_t=samp[:, 0], sample_x=samp[:, 1], sample_y=samp[:, 2],
                      counters={"detections": detections,
                                "offsite_exits": offsite,
                                "open_episodes_at_end": len(stack)})
    if include_state:
        cells = {xy: (c.direction, c.visits) for xy, c in env.materialized()}
        trace.state = {"chip": chip, "cells": cells}
    return trace


def _dir_code(bx, by, ax, ay):
    if ax == bx:
        return 0 if ay == by + 1 else 2
    return 1 if ax == bx + 1 else 3
