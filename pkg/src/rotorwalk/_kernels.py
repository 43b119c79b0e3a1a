"""Numba kernels: the hot loops behind the finite-graph harness and the
unbounded-lattice walker.

The lattice kernel operates on a dense square box of cells centred on the
origin.  It returns a status code whenever it needs the Python wrapper to
act (grow the box, flush the event buffer, grow a scratch array, report a
violation) and is re-entered afterwards; two pending flags make a step
interrupted mid-processing resumable, so segmented runs are bit-identical
to single runs.

Every function here has a pure-Python mirror (engine.run, the reference
walker in lattice.py) that tests compare against.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# -- counter-based cell RNG ----------------------------------------------------
#
# splitmix64 finalizer over (seed, x, y); the top two bits give the cell's
# initial rotor direction.  Stateless, so any cell can be (re)computed on
# demand and a walk is reproducible from the seed alone.

U64_MASK = (1 << 64) - 1
DIR_SALT = 0x9E3779B97F4A7C15      # initial-direction stream
CTRL_SALT = 0xD1B54A32D192ED03     # per-step stream of the random-walk control

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S32 = np.uint64(32)
_S62 = np.uint64(62)
_LOW32 = np.uint64(0xFFFFFFFF)
_DIR_SALT = np.uint64(DIR_SALT)
_CTRL_SALT = np.uint64(CTRL_SALT)

_DX = np.array([0, 1, 0, -1], dtype=np.int64)   # N, E, S, W
_DY = np.array([1, 0, -1, 0], dtype=np.int64)


@njit(inline="always")
def _mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(inline="always")
def _hash_seed(seed):
    return _mix64(seed ^ _DIR_SALT)


@njit(inline="always")
def _cell_direction(hseed, x, y):
    ux = np.uint64(x)
    uy = np.uint64(y)
    key = (ux << _S32) ^ (uy & _LOW32)
    return np.int64(_mix64(hseed ^ key) >> _S62)


@njit(cache=True)
def cell_direction_batch(seed, xs, ys, out):
    h = _hash_seed(seed)
    for i in range(xs.shape[0]):
        out[i] = _cell_direction(h, xs[i], ys[i])


@njit(cache=True)
def fill_box_directions(seed, ox, oy, width, height, out):
    """Initial directions for every cell of a box, row-major from (ox, oy)."""
    h = _hash_seed(seed)
    for j in range(height):
        for i in range(width):
            out[j * width + i] = _cell_direction(h, ox + i, oy + j)


def mix64(z):
    """Python mirror of the in-kernel splitmix64 finalizer."""
    z &= U64_MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & U64_MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & U64_MASK
    return (z ^ (z >> 31)) & U64_MASK


def initial_direction(seed, x, y):
    """Python mirror of the cell RNG; must agree with the kernels bit for
    bit (a test enforces this)."""
    h = mix64((seed & U64_MASK) ^ DIR_SALT)
    key = (((x & U64_MASK) << 32) & U64_MASK) ^ (y & 0xFFFFFFFF)
    return mix64(h ^ key) >> 62


# -- finite-graph kernels -------------------------------------------------------


@njit(cache=True)
def finite_run_until(offsets, targets, alpha, counts, chip,
                     stop_vertex, stop_alpha, max_steps,
                     flip_target, flip_time, t0):
    """Step until the chip sits on stop_vertex with that vertex's rotor at
    stop_alpha (checked before the first step too, so an already-satisfied
    stop takes 0 steps).  stop_vertex < 0 runs max_steps unconditionally.

    flip_time[v] records the first time (offset by t0, 1-based) the rotor
    at v reaches flip_target[v]; pass flip_target = -1 to ignore a vertex.

    Returns (status, steps, chip); status 1 means the budget ran out
    before the stop condition held.
    """
    if stop_vertex >= 0 and chip == stop_vertex and alpha[stop_vertex] == stop_alpha:
        return 0, 0, chip
    t = 0
    while t < max_steps:
        a = alpha[chip] + 1
        if a == offsets[chip + 1] - offsets[chip]:
            a = 0
        alpha[chip] = a
        counts[chip] += 1
        if flip_target[chip] == a and flip_time[chip] < 0:
            flip_time[chip] = t0 + t + 1
        chip = targets[offsets[chip] + a]
        t += 1
        if stop_vertex >= 0 and chip == stop_vertex and alpha[stop_vertex] == stop_alpha:
            return 0, t, chip
    if stop_vertex < 0:
        return 0, t, chip
    return 1, t, chip


@njit(cache=True)
def finite_run_until_reversed(offsets, targets, alpha, counts, chip,
                              stop_vertex, contour_target, remaining, max_steps):
    """Step until every monitored rotor equals its target simultaneously
    with the chip sitting on stop_vertex.  contour_target[v] = -1 leaves v
    unmonitored; ``remaining`` must come in as the number of monitored
    mismatches and is maintained incrementally."""
    if remaining == 0 and chip == stop_vertex:
        return 0, 0, chip, remaining
    t = 0
    while t < max_steps:
        ct = contour_target[chip]
        old = alpha[chip]
        a = old + 1
        if a == offsets[chip + 1] - offsets[chip]:
            a = 0
        if ct >= 0:
            if old == ct:
                remaining += 1
            if a == ct:
                remaining -= 1
        alpha[chip] = a
        counts[chip] += 1
        chip = targets[offsets[chip] + a]
        t += 1
        if remaining == 0 and chip == stop_vertex:
            return 0, t, chip, remaining
    return 1, t, chip, remaining


@njit(cache=True)
def finite_run_trace(offsets, targets, alpha, chip, trace):
    """Plain run recording the chip position after every step."""
    for t in range(trace.shape[0]):
        a = alpha[chip] + 1
        if a == offsets[chip + 1] - offsets[chip]:
            a = 0
        alpha[chip] = a
        chip = targets[offsets[chip] + a]
        trace[t] = chip
    return chip


@njit(cache=True)
def finite_run_to_unicycle(offsets, targets, alpha, chip, max_steps, check_every, color):
    """Step until the rotor subgraph is a single cycle through the chip
    (the recurrent condition).  The test runs every check_every steps;
    once true it stays true, so overshooting is harmless.

    color is an int8 scratch of length n.  Returns (status, steps, chip);
    status 1 = budget exhausted."""
    n = alpha.shape[0]
    t = 0
    while True:
        for i in range(n):
            color[i] = 0
        ncyc = 0
        chip_on = False
        for v0 in range(n):
            if color[v0] != 0:
                continue
            v = v0
            while color[v] == 0:
                color[v] = 1
                v = targets[offsets[v] + alpha[v]]
            if color[v] == 1:  # new cycle closed inside this chain
                ncyc += 1
                u = v
                while True:
                    if u == chip:
                        chip_on = True
                    color[u] = 3
                    u = targets[offsets[u] + alpha[u]]
                    if u == v:
                        break
            u = v0
            while color[u] == 1:
                color[u] = 2
                u = targets[offsets[u] + alpha[u]]
        if ncyc == 1 and chip_on:
            return 0, t, chip
        if t >= max_steps:
            return 1, t, chip
        burst = check_every
        if t + burst > max_steps:
            burst = max_steps - t
        for _ in range(burst):
            a = alpha[chip] + 1
            if a == offsets[chip + 1] - offsets[chip]:
                a = 0
            alpha[chip] = a
            chip = targets[offsets[chip] + a]
        t += burst


# -- lattice kernel -------------------------------------------------------------
#
# Shared int64 register file (indices below) keeps all scalar state so the
# kernel can return to Python and resume exactly where it stopped.

R_T = 0            # steps completed
R_TTARGET = 1      # run until this many steps
R_CX = 2           # chip position
R_CY = 3
R_PX = 4           # source of the last step
R_PY = 5
R_OX = 6           # box origin (minimum coordinates)
R_OY = 7
R_W = 8            # box dimensions
R_H = 9
R_NEXT_SAMPLE = 10
R_KCOUNT = 11      # labels opened so far (next k)
R_STACK = 12       # open episodes
R_POOL = 13        # ints used in the contour pool
R_SERIAL = 14      # detection epoch serial (never reused)
R_EV = 15          # events in the output buffer
R_PENDDET = 16     # step mutation+closes done, detection outstanding
R_PENDOPEN = 17    # detection found an event, episode push outstanding
R_PA2 = 18         # pending event doubled area
R_PLEN = 19        # pending event contour length
R_GX = 20          # coordinate that must fit after a box grow
R_GY = 21
R_VT = 22          # violation info: step and entry vertex
R_OFFEXITS = 23    # episodes whose exit step departed away from the entry vertex
R_VX = 24
R_VY = 25
R_HOPS = 26        # total detection chain hops (diagnostic)
R_MAXCHAIN = 27
R_MAXDEPTH = 28    # deepest episode nesting seen
R_CO = 29          # ints used in the recorded-contour pool
R_NREGS = 32

ST_DONE = 0
ST_GROW = 1
ST_EV_FULL = 2
ST_STACK_FULL = 3
ST_POOL_FULL = 4
ST_CHAIN_FULL = 5
ST_VIOLATION = 6
ST_CO_FULL = 7


@njit(inline="always")
def _inside_or_on(qx, qy, pool, off, length):
    """1 if (qx,qy) is on or inside a unit-step lattice polygon stored as
    interleaved x,y pairs.  Crossing parity counts vertical unit edges at
    x > qx whose lower endpoint sits at qy (half-open rule); boundary
    points of a unit-step polygon are exactly its vertices."""
    cross = 0
    for i in range(length):
        ax = pool[off + 2 * i]
        ay = pool[off + 2 * i + 1]
        if ax == qx and ay == qy:
            return 1
        j = i + 1
        if j == length:
            j = 0
        by = pool[off + 2 * j + 1]
        if ay != by and ax > qx:
            ymin = ay if ay < by else by
            if qy == ymin:
                cross ^= 1
    return cross


@njit(inline="always")
def _dir_between(bx, by, ax, ay):
    """Direction code of the unit step b -> a (must be neighbours)."""
    if ax == bx:
        return 0 if ay == by + 1 else 2
    return 1 if ax == bx + 1 else 3


@njit(cache=True)
def _detect(hs, regs, dirs, epochs, chain):
    """Follow rotors from the chip, marking cells with a fresh serial.

    Ends when the chain (a) returns to the chip -- a cycle through the
    chip; clockwise length>=3 cycles arm a pending episode open -- or
    (b) revisits a marked cell, a dead chain.  Escaping the box or filling
    the chain buffer suspends with R_PENDDET set so the wrapper can grow
    and re-enter."""
    ox = regs[R_OX]
    oy = regs[R_OY]
    w = regs[R_W]
    h = regs[R_H]
    cx = regs[R_CX]
    cy = regs[R_CY]
    serial = regs[R_SERIAL] + 1
    regs[R_SERIAL] = serial
    chain_cap = chain.shape[0] >> 1
    x = cx
    y = cy
    length = 0
    a2 = np.int64(0)
    while True:
        if length >= chain_cap:
            regs[R_PENDDET] = 1
            return ST_CHAIN_FULL
        chain[2 * length] = x
        chain[2 * length + 1] = y
        idx = (y - oy) * w + (x - ox)
        epochs[idx] = serial
        d = np.int64(dirs[idx])
        if d < 0:
            d = _cell_direction(hs, x, y)
            dirs[idx] = d
        nx = x + _DX[d]
        ny = y + _DY[d]
        a2 += x * ny - nx * y
        length += 1
        if nx == cx and ny == cy:
            regs[R_HOPS] += length
            if length > regs[R_MAXCHAIN]:
                regs[R_MAXCHAIN] = length
            if length >= 3 and a2 < 0:
                regs[R_PENDOPEN] = 1
                regs[R_PA2] = a2
                regs[R_PLEN] = length
            return 0
        if nx < ox or nx >= ox + w or ny < oy or ny >= oy + h:
            regs[R_GX] = nx
            regs[R_GY] = ny
            regs[R_PENDDET] = 1
            return ST_GROW
        nidx = (ny - oy) * w + (nx - ox)
        if epochs[nidx] == serial:
            regs[R_HOPS] += length
            if length > regs[R_MAXCHAIN]:
                regs[R_MAXCHAIN] = length
            return 0
        x = nx
        y = ny


@njit(cache=True)
def lattice_walk(seed, regs, dirs, cnts, epochs,
                 st_vx, st_vy, st_tin, st_k, st_off, st_len, st_area2, st_rev,
                 pool, chain,
                 ev_k, ev_x, ev_y, ev_tin, ev_tout, ev_len, ev_area2,
                 ev_depth, ev_coff, ev_clen,
                 co_pool, record_contours,
                 sched, samp_x, samp_y):
    """Run the lattice walker until regs[R_TTARGET] steps are done or the
    wrapper must intervene; see the module docstring for the protocol."""
    hs = _hash_seed(seed)
    stack_cap = st_vx.shape[0]
    pool_cap = pool.shape[0]
    ev_cap = ev_k.shape[0]
    nsched = sched.shape[0]
    while True:
        if regs[R_PENDOPEN] == 1:
            length = regs[R_PLEN]
            if regs[R_POOL] + 2 * length > pool_cap:
                return ST_POOL_FULL
            if regs[R_STACK] >= stack_cap:
                return ST_STACK_FULL
            s = regs[R_STACK]
            off = regs[R_POOL]
            for i in range(2 * length):
                pool[off + i] = chain[i]
            st_vx[s] = regs[R_CX]
            st_vy[s] = regs[R_CY]
            st_tin[s] = regs[R_T]
            st_k[s] = regs[R_KCOUNT]
            st_off[s] = off
            st_len[s] = length
            st_area2[s] = regs[R_PA2]
            st_rev[s] = 0
            regs[R_KCOUNT] += 1
            regs[R_POOL] = off + 2 * length
            regs[R_STACK] = s + 1
            if s + 1 > regs[R_MAXDEPTH]:
                regs[R_MAXDEPTH] = s + 1
            regs[R_PENDOPEN] = 0
            continue
        if regs[R_PENDDET] == 1:
            regs[R_PENDDET] = 0
            st = _detect(hs, regs, dirs, epochs, chain)
            if st != 0:
                return st
            continue
        if regs[R_T] >= regs[R_TTARGET]:
            return ST_DONE

        # conservative capacity checks so a step never stalls mid-close
        if regs[R_STACK] + 1 > stack_cap:
            return ST_STACK_FULL
        if regs[R_EV] + regs[R_STACK] + 1 > ev_cap:
            return ST_EV_FULL
        if record_contours == 1 and regs[R_CO] + regs[R_POOL] + 8 > co_pool.shape[0]:
            return ST_CO_FULL
        ox = regs[R_OX]
        oy = regs[R_OY]
        w = regs[R_W]
        h = regs[R_H]
        cx = regs[R_CX]
        cy = regs[R_CY]
        if cx - ox < 2 or cy - oy < 2 or ox + w - cx < 3 or oy + h - cy < 3:
            regs[R_GX] = cx
            regs[R_GY] = cy
            return ST_GROW

        # the step: advance the rotor clockwise, move along it
        idx = (cy - oy) * w + (cx - ox)
        d = np.int64(dirs[idx])
        if d < 0:
            d = _cell_direction(hs, cx, cy)
        d = (d + 1) & 3
        dirs[idx] = d
        cnts[idx] += 1
        regs[R_PX] = cx
        regs[R_PY] = cy
        cx += _DX[d]
        cy += _DY[d]
        regs[R_CX] = cx
        regs[R_CY] = cy
        t = regs[R_T] + 1
        regs[R_T] = t

        ns = regs[R_NEXT_SAMPLE]
        if ns < nsched and sched[ns] == t:
            samp_x[ns] = cx
            samp_y[ns] = cy
            regs[R_NEXT_SAMPLE] = ns + 1

        # close every episode whose region the chip has strictly left; the
        # reversal must already have been witnessed (see the scan below),
        # and the exit step need not depart from the entry vertex: a
        # concave entry corner has no exterior edge at all, so the chip
        # leaves such a region elsewhere
        while regs[R_STACK] > 0:
            s = regs[R_STACK] - 1
            off = st_off[s]
            length = st_len[s]
            if _inside_or_on(cx, cy, pool, off, length) == 1:
                break
            if st_rev[s] == 0:
                regs[R_VT] = t
                regs[R_VX] = st_vx[s]
                regs[R_VY] = st_vy[s]
                return ST_VIOLATION
            if regs[R_PX] != st_vx[s] or regs[R_PY] != st_vy[s]:
                regs[R_OFFEXITS] += 1
            e = regs[R_EV]
            ev_k[e] = st_k[s]
            ev_x[e] = st_vx[s]
            ev_y[e] = st_vy[s]
            ev_tin[e] = st_tin[s]
            # t_out is the last step of the interior visit; the chip is
            # strictly outside from step t_out + 1 onward
            ev_tout[e] = t - 1
            ev_len[e] = length
            ev_area2[e] = st_area2[s]
            ev_depth[e] = s
            if record_contours == 1:
                c0 = regs[R_CO]
                for i in range(2 * length):
                    co_pool[c0 + i] = pool[off + i]
                ev_coff[e] = c0
                ev_clen[e] = length
                regs[R_CO] = c0 + 2 * length
            else:
                ev_coff[e] = -1
                ev_clen[e] = 0
            regs[R_EV] = e + 1
            regs[R_POOL] = off
            regs[R_STACK] = s

        # reversal witness: the chip is back at an open episode's entry
        # vertex and every recorded contour vertex points at its contour
        # predecessor (the whole cycle runs anticlockwise)
        for s in range(regs[R_STACK]):
            if st_rev[s] == 0 and cx == st_vx[s] and cy == st_vy[s]:
                off = st_off[s]
                length = st_len[s]
                ok = 1
                for i in range(length):
                    bx = pool[off + 2 * i]
                    by = pool[off + 2 * i + 1]
                    p = i - 1 if i > 0 else length - 1
                    ax = pool[off + 2 * p]
                    ay = pool[off + 2 * p + 1]
                    bidx = (by - oy) * w + (bx - ox)
                    if np.int64(dirs[bidx]) != _dir_between(bx, by, ax, ay):
                        ok = 0
                        break
                if ok == 1:
                    st_rev[s] = 1

        st = _detect(hs, regs, dirs, epochs, chain)
        if st != 0:
            return st


@njit(cache=True)
def torus_walk(seed, b, nsteps, dirs, trace):
    """Rotor walk on a b x b torus from (0,0); dirs must come in as -1
    (unqueried).  trace[t] = row-major vertex id after step t."""
    hs = _hash_seed(seed)
    cx = np.int64(0)
    cy = np.int64(0)
    for t in range(nsteps):
        idx = cy * b + cx
        d = np.int64(dirs[idx])
        if d < 0:
            d = _cell_direction(hs, cx, cy)
        d = (d + 1) & 3
        dirs[idx] = d
        cx += _DX[d]
        cy += _DY[d]
        if cx == b:
            cx = 0
        elif cx < 0:
            cx = b - 1
        if cy == b:
            cy = 0
        elif cy < 0:
            cy = b - 1
        trace[t] = cy * b + cx


@njit(cache=True)
def random_walk(seed, nsteps, sched, samp_x, samp_y):
    """Simple random walk control: direction at step t from the same
    counter-based generator, keyed by step index instead of position."""
    base = _mix64(seed ^ _CTRL_SALT)
    cx = np.int64(0)
    cy = np.int64(0)
    ns = 0
    for t in range(1, nsteps + 1):
        d = np.int64(_mix64(base + np.uint64(t)) >> _S62)
        cx += _DX[d]
        cy += _DY[d]
        if ns < sched.shape[0] and sched[ns] == t:
            samp_x[ns] = cx
            samp_y[ns] = cy
            ns += 1
