"""Machine checks of the finite-graph reversibility properties.

Each verifier runs the deterministic dynamics on a generated instance and
asserts the exact combinatorial claims:

- recurrence dichotomy: a state recurs within |E| steps iff its rotor
  subgraph is a single cycle through the chip (suite ``propA``);
- from a unicycle on an Eulerian digraph, |E| steps form a closed Euler
  tour with every rotor making one full turn (``propB``);
- a clockwise contour with positively-configured rotors is pointwise
  reversed when the chip returns to its start, interior rotors make one
  full turn, exterior rotors never move (``theorem1``);
- on any contour where each vertex's successor edge follows its
  predecessor edge in rotor order, rotors reach the predecessor position
  in strictly anti-traversal order within |E| steps (``lemma1``);
- the k-phase protocol on a clockwise contour with anticlockwise internal
  contours reverses all of them, middle rotors turning fully and the rest
  never moving (``theorem2``), with outer flips strictly ordered
  (``corollary``), and the whole protocol equivalent to one Euler tour of
  an auxiliary unicycle graph (``aux-equiv``);
- the same protocol still terminates at the entry vertices and reverses
  the outer contour when internal contours start clockwise
  (``cw-internal``).

Suite names are the stable CLI vocabulary; the functions behind them are
named for what they check.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .engine import detect_recurrence, run, verify_euler_tour
from .geometry import (Orientation, interior_vertices, orientation,
                       polygon_of, signed_area2)
from .graphs import (Digraph, GraphError, Multicycle, WalkState,
                     build_bidirected_grid, build_bidirected_torus,
                     find_cycles, is_eulerian, is_unicycle)


class HarnessError(RuntimeError):
    """Instance generation or verification preconditions failed."""


@dataclass
class CheckReport:
    name: str
    passed: bool
    assertions: dict
    details: dict = field(default_factory=dict)

    def failed(self):
        return [k for k, ok in self.assertions.items() if not ok]


def _finish(name, assertions, details=None):
    return CheckReport(name, all(assertions.values()), assertions, details or {})


def _rng(seed_or_rng):
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


# -- random instances ------------------------------------------------------------


def random_rotor_state(g, rng):
    rng = _rng(rng)
    degs = (g.offsets[1:] - g.offsets[:-1]).astype(np.int64)
    rotors = (rng.integers(0, degs)).astype(np.int32)
    return WalkState(rotors, int(rng.integers(g.n)))


def random_eulerian_digraph(rng, max_vertices=20):
    """A random Eulerian digraph: a Hamiltonian ring for strong
    connectivity plus superposed random cycles (skipped wholesale when
    they would duplicate an edge), with shuffled rotor orders."""
    rng = _rng(rng)
    n = int(rng.integers(3, max_vertices + 1))
    perm = rng.permutation(n)
    edges = set()
    out = [[] for _ in range(n)]

    def add_cycle(vs):
        cyc = [(int(vs[i]), int(vs[(i + 1) % len(vs)])) for i in range(len(vs))]
        if any(e in edges for e in cyc):
            return
        for a, b in cyc:
            edges.add((a, b))
            out[a].append(b)

    add_cycle(perm)
    for _ in range(int(rng.integers(1, 2 * n // 3 + 2))):
        ln = int(rng.integers(2, min(6, n) + 1))
        add_cycle(rng.choice(n, size=ln, replace=False))
    for v in range(n):
        rng.shuffle(out[v])
    return Digraph(out)


def run_to_recurrent(g, s, max_steps=None):
    """Advance a state until it becomes a unicycle (the recurrent
    condition on Eulerian graphs); returns the reached WalkState."""
    if max_steps is None:
        max_steps = 64 * g.edge_count * g.n + 1024
    alpha = s.rotors.astype(np.int32, copy=True)
    color = np.zeros(g.n, dtype=np.int8)
    status, _, chip = K.finite_run_to_unicycle(
        g.offsets, g.targets, alpha, s.chip, max_steps, max(g.n, 16), color)
    if status != 0:
        raise HarnessError(f"no unicycle within {max_steps} steps")
    return WalkState(alpha, int(chip))


def random_unicycle(g, rng):
    rng = _rng(rng)
    return run_to_recurrent(g, random_rotor_state(g, rng))


def gen_unicycle_cw(g, rng, max_retries=500):
    """A unicycle on an embedded grid whose cycle is a clockwise contour:
    run random states to recurrence, retry until the cycle qualifies."""
    rng = _rng(rng)
    for _ in range(max_retries):
        s = run_to_recurrent(g, random_rotor_state(g, rng))
        cyc = find_cycles(g, s.rotors)[0]
        if cyc.is_contour and orientation(cyc, g) is Orientation.CLOCKWISE:
            return s
    raise HarnessError(f"no clockwise-contour unicycle in {max_retries} tries")


# -- single-contour reversal (theorem1) -------------------------------------------


def _reversal_targets(g, cycle):
    """alpha index at each cycle vertex that points at its predecessor."""
    vs = cycle.vertices
    return {vs[i]: g.edge_index(vs[i], vs[i - 1]) for i in range(len(vs))}


def verify_contour_reversal(g, s):
    """From a clockwise-contour unicycle, run until every contour rotor
    points at its predecessor and the chip is back at its start; then the
    contour is anticlockwise, interior rotors made one full turn and
    exterior rotors never moved."""
    cycles = find_cycles(g, s.rotors)
    if len(cycles) != 1 or s.chip not in cycles[0]:
        raise HarnessError("state is not a unicycle through the chip")
    cyc = cycles[0]
    if not cyc.is_contour or orientation(cyc, g) is not Orientation.CLOCKWISE:
        raise HarnessError("cycle is not a clockwise contour")

    targets = _reversal_targets(g, cyc)
    contour_target = np.full(g.n, -1, dtype=np.int32)
    for v, a in targets.items():
        contour_target[v] = a
    remaining = sum(1 for v, a in targets.items() if s.rotors[v] != a)
    alpha = s.rotors.astype(np.int32, copy=True)
    counts = np.zeros(g.n, dtype=np.int64)
    status, steps, chip, _ = K.finite_run_until_reversed(
        g.offsets, g.targets, alpha, counts, s.chip, s.chip,
        contour_target, remaining, g.edge_count)

    on_c = set(cyc.vertices)
    inside = interior_vertices(cyc, g)
    outside = [v for v in range(g.n) if v not in on_c and v not in inside]
    degs = (g.offsets[1:] - g.offsets[:-1]).astype(np.int64)

    partial_ok = True
    for v, a in targets.items():
        swept = (a - int(s.rotors[v])) % int(degs[v])
        if not (1 <= swept <= degs[v] - 1 and counts[v] == swept):
            partial_ok = False
    assertions = {
        "terminated": status == 0,
        "chip_at_start": chip == s.chip,
        "contour_reversed": all(alpha[v] == a for v, a in targets.items()),
        "reversal_is_anticlockwise":
            signed_area2(polygon_of(cyc, g)[::-1]) > 0,
        "interior_full_turn": all(counts[v] == degs[v] for v in inside),
        "exterior_untouched": all(counts[v] == 0 for v in outside),
        "contour_partial_turn": partial_ok,
    }
    return _finish("contour_reversal", assertions,
                   {"steps": int(steps), "contour_len": len(cyc),
                    "interior": len(inside)})


# -- rotor flip ordering (lemma1) --------------------------------------------------


@dataclass(frozen=True)
class DominoContour:
    """A cyclic vertex listing (v_1..v_n) in which each vertex's edge to
    its successor immediately follows its edge to its predecessor in
    rotor order.  star[v] is the predecessor edge index."""

    vertices: tuple
    star: dict


def gen_domino_instance(g, contour, rng):
    """Positively configured state for a contour: find the traversal
    direction with the successor-follows-predecessor property, rotate it
    randomly, point every contour rotor at its successor (one past the
    predecessor), randomize the rest, chip at the listing's end."""
    rng = _rng(rng)
    vs = [int(v) for v in contour]
    if len(vs) < 3:
        raise HarnessError("contours need at least 3 vertices (no dimers)")
    if len(set(vs)) != len(vs):
        raise HarnessError("contour vertices must be distinct")
    for i in range(len(vs)):
        a, b = vs[i], vs[(i + 1) % len(vs)]
        if not (g.has_edge(a, b) and g.has_edge(b, a)):
            raise HarnessError(f"contour needs edges both ways between {a},{b}")

    chosen = None
    for cand in (vs, vs[::-1]):
        ok = True
        for i in range(len(cand)):
            v = cand[i]
            pred_i = g.edge_index(v, cand[i - 1])
            succ_i = g.edge_index(v, cand[(i + 1) % len(cand)])
            if succ_i != (pred_i + 1) % g.degree(v):
                ok = False
                break
        if ok:
            chosen = cand
            break
    if chosen is None:
        raise HarnessError("no traversal direction is domino-ordered here")

    shift = int(rng.integers(len(chosen)))
    listing = tuple(chosen[shift:] + chosen[:shift])
    s = random_rotor_state(g, rng)
    star = {}
    for i in range(len(listing)):
        v = listing[i]
        star[v] = g.edge_index(v, listing[i - 1])
        s.rotors[v] = (star[v] + 1) % g.degree(v)
    s.chip = listing[-1]
    return s, DominoContour(listing, star)


def verify_flip_ordering(g, s, dc):
    """Run |E| steps recording when each contour rotor first reaches its
    predecessor position; with the chip starting at v_n the times must
    satisfy 0 < t(v_n) < t(v_{n-1}) < ... < t(v_1) <= |E|."""
    listing = dc.vertices
    if s.chip != listing[-1]:
        raise HarnessError("chip must start at the listing's last vertex")
    flip_target = np.full(g.n, -1, dtype=np.int32)
    for v, a in dc.star.items():
        flip_target[v] = a
    flip_time = np.full(g.n, -1, dtype=np.int64)
    alpha = s.rotors.astype(np.int32, copy=True)
    counts = np.zeros(g.n, dtype=np.int64)
    K.finite_run_until(g.offsets, g.targets, alpha, counts, s.chip,
                       -1, 0, g.edge_count, flip_target, flip_time, 0)
    times = [int(flip_time[v]) for v in listing]  # t(v_1) first
    assertions = {
        "all_flipped": all(t > 0 for t in times),
        "strictly_ordered": all(times[i] > times[i + 1]
                                for i in range(len(times) - 1)),
        "within_budget": max(times) <= g.edge_count and min(times) >= 1,
    }
    return _finish("flip_ordering", assertions,
                   {"times": times, "edges": g.edge_count})


def build_domino_row_torus(width, height, row):
    """Torus whose row-``row`` vertices use rotor order N, S, W, E so the
    eastward non-contractible row cycle is domino-ordered.  Returns the
    graph and that cycle's vertex listing."""
    if width < 3 or height < 3:
        raise HarnessError("torus needs both dimensions >= 3")

    def vid(x, y):
        return (y % height) * width + (x % width)

    out = []
    for y in range(height):
        for x in range(width):
            n, e = vid(x, y + 1), vid(x + 1, y)
            s_, w_ = vid(x, y - 1), vid(x - 1, y)
            out.append([n, s_, w_, e] if y == row else [n, e, s_, w_])
    return Digraph(out), [vid(x, row) for x in range(width)]


# -- rectangle-ring multicycles ----------------------------------------------------


def _grid_dims(g):
    if g.embedding is None:
        raise HarnessError("need an embedded grid")
    return int(g.embedding[:, 0].max()) + 1, int(g.embedding[:, 1].max()) + 1


def _ring_path(x0, y0, x1, y1, clockwise):
    pts = ([(x0, y) for y in range(y0, y1 + 1)]
           + [(x, y1) for x in range(x0 + 1, x1 + 1)]
           + [(x1, y) for y in range(y1 - 1, y0 - 1, -1)]
           + [(x, y0) for x in range(x1 - 1, x0, -1)])
    return pts if clockwise else pts[::-1]


def multicycle_from_rings(g, rects, orientations, rng):
    """Multicycle from axis-aligned rectangle rings: ring rotors follow
    the given traversals, every other vertex joins a loop-erased-walk
    forest rooted on the rings (so the rotor subgraph has exactly these
    cycles), one chip per ring at a random position."""
    rng = _rng(rng)
    width, _ = _grid_dims(g)

    def vid(x, y):
        return y * width + x

    alpha = random_rotor_state(g, rng).rotors
    rooted = np.zeros(g.n, dtype=bool)
    chips = []
    for (x0, y0, x1, y1), cw in zip(rects, orientations):
        if x1 <= x0 or y1 <= y0:
            raise HarnessError("degenerate rectangle ring")
        vids = [vid(x, y) for x, y in _ring_path(x0, y0, x1, y1, cw)]
        if any(rooted[v] for v in vids):
            raise HarnessError("rings must be vertex-disjoint")
        for i, v in enumerate(vids):
            alpha[v] = g.edge_index(v, vids[(i + 1) % len(vids)])
            rooted[v] = True
        chips.append(int(vids[rng.integers(len(vids))]))

    for v0 in rng.permutation(g.n):
        v0 = int(v0)
        if rooted[v0]:
            continue
        path = [v0]
        pos = {v0: 0}
        while not rooted[path[-1]]:
            u = path[-1]
            nbrs = g.out(u)
            w = int(nbrs[rng.integers(len(nbrs))])
            if w in pos:  # erase the loop just closed
                for z in path[pos[w] + 1:]:
                    del pos[z]
                del path[pos[w] + 1:]
            else:
                pos[w] = len(path)
                path.append(w)
        for i in range(len(path) - 1):
            alpha[path[i]] = g.edge_index(path[i], path[i + 1])
            rooted[path[i]] = True
    return Multicycle(alpha, tuple(chips))


def _boxes_compatible(a, b):
    """Disjoint (gap allowed to be zero only without shared vertices) or
    one strictly inside the other."""
    ax0, ay0, ax1, ay1 = a
    bx0, by0, bx1, by1 = b
    disjoint = ax1 < bx0 or bx1 < ax0 or ay1 < by0 or by1 < ay0
    a_in_b = bx0 < ax0 and ax1 < bx1 and by0 < ay0 and ay1 < by1
    b_in_a = ax0 < bx0 and bx1 < ax1 and ay0 < by0 and by1 < ay1
    return disjoint or a_in_b or b_in_a


def _sample_rect_inside(rng, host):
    x0h, y0h, x1h, y1h = host
    if x1h - x0h < 3 or y1h - y0h < 3:
        return None
    x0 = int(rng.integers(x0h + 1, x1h - 1))
    x1 = int(rng.integers(x0 + 1, x1h))
    y0 = int(rng.integers(y0h + 1, y1h - 1))
    y1 = int(rng.integers(y0 + 1, y1h))
    return (x0, y0, x1, y1)


def _boxes_disjoint(a, b):
    return a[2] < b[0] or b[2] < a[0] or a[3] < b[1] or b[3] < a[1]


def gen_multicycle(g, k, rng):
    """k disjoint rectangle rings: a clockwise outer one and k-1
    anticlockwise rings strictly inside it, none nested."""
    rng = _rng(rng)
    width, height = _grid_dims(g)
    if k < 1:
        raise HarnessError("k must be >= 1")
    for _ in range(300):
        x0 = int(rng.integers(0, max(1, width - 3)))
        y0 = int(rng.integers(0, max(1, height - 3)))
        x1 = int(rng.integers(x0 + (3 if k > 1 else 1), width))
        y1 = int(rng.integers(y0 + (3 if k > 1 else 1), height))
        outer = (x0, y0, x1, y1)
        inner = []
        tries = 0
        while len(inner) < k - 1 and tries < 200:
            tries += 1
            cand = _sample_rect_inside(rng, outer)
            if cand is not None and all(_boxes_disjoint(cand, b) for b in inner):
                inner.append(cand)
        if len(inner) == k - 1:
            rects = [outer] + inner
            orientations = [True] + [False] * (k - 1)
            return multicycle_from_rings(g, rects, orientations, rng)
    raise HarnessError(f"could not place {k} disjoint rings on {width}x{height}")


def gen_cw_internal_instance(g, rng, k=None, max_depth=3):
    """Like gen_multicycle but internal rings may nest and take random
    orientations, with at least one starting clockwise."""
    rng = _rng(rng)
    width, height = _grid_dims(g)
    if k is None:
        k = int(rng.integers(2, 6))
    if k < 2:
        raise HarnessError("need at least one internal ring")
    for _ in range(300):
        x0 = int(rng.integers(0, max(1, width - 5)))
        y0 = int(rng.integers(0, max(1, height - 5)))
        x1 = int(rng.integers(min(x0 + 4, width - 1), width))
        y1 = int(rng.integers(min(y0 + 4, height - 1), height))
        rings = [(x0, y0, x1, y1)]
        depth = {0: 0}
        placed = True
        for _j in range(k - 1):
            ok = False
            for _try in range(120):
                hi = int(rng.integers(len(rings)))
                if depth[hi] >= max_depth:
                    continue
                cand = _sample_rect_inside(rng, rings[hi])
                if cand is None:
                    continue
                if all(_boxes_compatible(cand, b) for b in rings):
                    rings.append(cand)
                    depth[len(rings) - 1] = depth[hi] + 1
                    ok = True
                    break
            if not ok:
                placed = False
                break
        if not placed:
            continue
        orientations = [True] + [bool(rng.integers(2)) for _ in range(k - 1)]
        if not any(orientations[1:]):
            orientations[1 + int(rng.integers(k - 1))] = True  # force a clockwise internal
        return multicycle_from_rings(g, rings, orientations, rng)
    raise HarnessError(f"could not place {k} nested rings on {width}x{height}")


# -- k-phase protocol (theorem2 family) ---------------------------------------------


@dataclass
class MulticycleLayout:
    cycles: list            # chip-aligned Cycle objects, [0] is the outer
    targets: np.ndarray     # reversal alpha per cycle vertex, -1 elsewhere
    middle: set
    interiors: list
    outside: set


def analyze_multicycle(g, m, require_acw_internals=True):
    cycles_all = find_cycles(g, m.rotors)
    if len(cycles_all) != len(m.chips):
        raise HarnessError(
            f"rotor subgraph has {len(cycles_all)} cycles, expected {len(m.chips)}")
    cycles = []
    used = set()
    for chip in m.chips:
        hit = [c for c in cycles_all if chip in c]
        if not hit or id(hit[0]) in used:
            raise HarnessError("chips do not sit on distinct cycles")
        used.add(id(hit[0]))
        cycles.append(hit[0])
    outer = cycles[0]
    if not outer.is_contour or orientation(outer, g) is not Orientation.CLOCKWISE:
        raise HarnessError("outer cycle is not a clockwise contour")
    inside0 = interior_vertices(outer, g)
    interiors = [None]
    for cyc in cycles[1:]:
        if not cyc.is_contour:
            raise HarnessError("internal cycles must be contours")
        if require_acw_internals and orientation(cyc, g) is not Orientation.ANTICLOCKWISE:
            raise HarnessError("internal cycles must start anticlockwise")
        if not set(cyc.vertices) <= inside0:
            raise HarnessError("internal cycles must sit strictly inside the outer one")
        interiors.append(interior_vertices(cyc, g))
    targets = np.full(g.n, -1, dtype=np.int32)
    for cyc in cycles:
        for v, a in _reversal_targets(g, cyc).items():
            targets[v] = a
    covered = set(outer.vertices)
    for cyc in cycles[1:]:
        covered |= set(cyc.vertices)
    middle = set(inside0) - covered
    for s_ in interiors[1:]:
        middle -= s_
    outside = set(range(g.n)) - set(outer.vertices) - set(inside0)
    return MulticycleLayout(cycles, targets, middle, interiors, outside)


def _run_phases(g, m, layout, alpha, counts, flip_target=None, flip_time=None,
                cap_mult=1):
    """Phase i: step from chip a_i until it rests on a_i with a_i's rotor
    at the reversal target (0 steps if already true).  Returns
    (all_terminated, per-phase steps)."""
    if flip_target is None:
        flip_target = np.full(g.n, -1, dtype=np.int32)
        flip_time = np.full(g.n, -1, dtype=np.int64)
    phase_steps = []
    t0 = 0
    cap = cap_mult * g.edge_count
    for chip in m.chips:
        status, steps, _ = K.finite_run_until(
            g.offsets, g.targets, alpha, counts, chip,
            chip, int(layout.targets[chip]), cap, flip_target, flip_time, t0)
        phase_steps.append(int(steps))
        t0 += int(steps)
        if status != 0:
            return False, phase_steps
    return True, phase_steps


def verify_multicycle_reversal(g, m, record_flips=False):
    """Run the k-phase protocol and assert: all contours reversed, middle
    rotors one full turn, internal interiors and the outside untouched."""
    layout = analyze_multicycle(g, m)
    alpha = m.rotors.astype(np.int32, copy=True)
    counts = np.zeros(g.n, dtype=np.int64)
    flip_target = flip_time = None
    if record_flips:
        flip_target = np.full(g.n, -1, dtype=np.int32)
        flip_time = np.full(g.n, -1, dtype=np.int64)
        for v in layout.cycles[0].vertices:
            flip_target[v] = layout.targets[v]
    terminated, phase_steps = _run_phases(
        g, m, layout, alpha, counts,
        flip_target=flip_target, flip_time=flip_time)

    degs = (g.offsets[1:] - g.offsets[:-1]).astype(np.int64)
    cyc_vs = [v for c in layout.cycles for v in c.vertices]
    middle = sorted(layout.middle)
    mid_counts = counts[middle] if middle else np.zeros(0, dtype=np.int64)
    mid_degs = degs[middle] if middle else np.zeros(0, dtype=np.int64)
    exact_turn = bool(np.all(mid_counts == mid_degs))
    mod_turn = bool(np.all(mid_counts > 0) and np.all(mid_counts % mid_degs == 0))
    untouched = set()
    for s_ in layout.interiors[1:]:
        untouched |= s_
    assertions = {
        "phases_terminated": terminated,
        "all_contours_reversed":
            all(alpha[v] == layout.targets[v] for v in cyc_vs),
        "middle_full_turn": exact_turn or mod_turn,
        "interiors_untouched": all(counts[v] == 0 for v in untouched),
        "outside_untouched": all(counts[v] == 0 for v in layout.outside),
    }
    details = {
        "phase_steps": phase_steps,
        "k": len(m.chips),
        "final_rotors": alpha,
        "counts": counts,
        "full_turn_multiplicity_anomaly": exact_turn is False and mod_turn,
    }
    if record_flips:
        details["flip_time"] = flip_time
        details["phase0_steps"] = phase_steps[0] if phase_steps else 0
    return _finish("multicycle_reversal", assertions, details)


def verify_reversal_ordering(g, m):
    """Outer-contour rotors reach their reversal positions in strictly
    anti-traversal order, the entry vertex first."""
    rep = verify_multicycle_reversal(g, m, record_flips=True)
    layout_outer = rep.details.get("flip_time")
    cycles = analyze_multicycle(g, m).cycles
    listing = cycles[0].rotated_to_end(m.chips[0])  # (v_1 .. v_n = a_0)
    times = [int(layout_outer[v]) for v in listing]
    after_phase0 = sum(1 for t in times if t > rep.details["phase0_steps"])
    assertions = dict(rep.assertions)
    assertions["all_flipped"] = all(t > 0 for t in times)
    assertions["strictly_ordered"] = all(
        times[i] > times[i + 1] for i in range(len(times) - 1))
    return _finish("reversal_ordering", assertions,
                   {"times": times, "flips_after_phase0": after_phase0,
                    "phase_steps": rep.details["phase_steps"]})


def build_auxiliary_unicycle(m, g):
    """Collapse a multicycle instance to a single Euler tour problem.

    Keeps the outer contour, the middle region and the internal contours;
    drops the outside and the internal interiors; adds one primed vertex
    per chip, joined to it by a two-way spoke, the primed vertices joined
    in a ring (a dimer for k=2, a pendant for k=1).  Cycle rotors start
    reversed, middle rotors keep their directions, chip rotors point at
    their spokes, primed rotors follow the ring; the chip starts on
    a_0-primed.  Returns (graph, state, orig) where orig maps new vertex
    ids to original ids (-1 for primed vertices).

    The resulting state is a unicycle on an Eulerian graph, so one |E*|
    tour makes every rotor a full turn; agreement of this start state
    with the protocol's final state on shared non-chip vertices is what
    verify_aux_equivalence checks.
    """
    layout = analyze_multicycle(g, m)
    k = len(m.chips)
    kept = sorted(set().union(*[set(c.vertices) for c in layout.cycles],
                              layout.middle))
    keep = set(kept)
    old2new = {v: i for i, v in enumerate(kept)}
    nk = len(kept)
    out = []
    for v in kept:
        out.append([old2new[int(w)] for w in g.out(v) if int(w) in keep])
    chip_pos = {c: i for i, c in enumerate(m.chips)}
    for c in m.chips:
        out[old2new[c]].append(nk + chip_pos[c])  # spoke, appended last
    for i in range(k):
        if k == 1:
            ring = [old2new[m.chips[0]]]
        elif k == 2:
            ring = [nk + (1 - i), old2new[m.chips[i]]]
        else:
            ring = [nk + (i + 1) % k, nk + (i - 1) % k, old2new[m.chips[i]]]
        out.append(ring)
    gs = Digraph(out)

    rotors = np.zeros(gs.n, dtype=np.int32)
    for cyc in layout.cycles:
        for v, a_old in _reversal_targets(g, cyc).items():
            if v in chip_pos:
                continue
            tgt = int(g.out(v)[a_old])
            rotors[old2new[v]] = gs.edge_index(old2new[v], old2new[tgt])
    for v in layout.middle:
        tgt = int(g.out(v)[int(m.rotors[v])])
        rotors[old2new[v]] = gs.edge_index(old2new[v], old2new[tgt])
    for c in m.chips:
        rotors[old2new[c]] = gs.degree(old2new[c]) - 1  # the spoke
    # primed rotors stay 0: ring successor (or the lone spoke edge)
    state = WalkState(rotors, nk)  # chip at a_0-primed
    orig = np.full(gs.n, -1, dtype=np.int64)
    for v, i in old2new.items():
        orig[i] = v
    if not is_eulerian(gs):
        raise HarnessError("auxiliary graph is not Eulerian")
    if not is_unicycle(gs, state):
        raise HarnessError("auxiliary state is not a unicycle")
    return gs, state, orig


def verify_aux_equivalence(g, m):
    """The protocol's final state equals the auxiliary unicycle's start
    state on shared vertices (chips excepted, their auxiliary rotors are
    spoke overrides), and the auxiliary graph admits the full Euler tour."""
    rep = verify_multicycle_reversal(g, m)
    final_alpha = rep.details["final_rotors"]
    gs, state, orig = build_auxiliary_unicycle(m, g)
    tour = verify_euler_tour(gs, state)
    chips = set(m.chips)
    agree = True
    for vn in range(gs.n):
        vo = int(orig[vn])
        if vo < 0 or vo in chips:
            continue
        tgt_new = int(orig[int(gs.out(vn)[int(state.rotors[vn])])])
        tgt_old = int(g.out(vo)[int(final_alpha[vo])])
        if tgt_new != tgt_old:
            agree = False
            break
    assertions = {
        "protocol_passed": rep.passed,
        "aux_eulerian": True,   # build_auxiliary_unicycle raises otherwise
        "aux_unicycle": True,
        "euler_tour": tour.passed,
        "states_agree_off_chips": agree,
    }
    return _finish("aux_equivalence", assertions,
                   {"aux_vertices": gs.n, "aux_edges": gs.edge_count})


def verify_cw_internal(g, m):
    """Clockwise-started internal contours: the phase protocol must still
    terminate (each chip resting back on its entry vertex) and reverse
    the outer contour; internal final orientations are reported."""
    layout = analyze_multicycle(g, m, require_acw_internals=False)
    initial_orient = [orientation(c, g).value for c in layout.cycles]
    alpha = m.rotors.astype(np.int32, copy=True)
    counts = np.zeros(g.n, dtype=np.int64)
    terminated, phase_steps = _run_phases(g, m, layout, alpha, counts, cap_mult=8)
    outer = layout.cycles[0]
    assertions = {
        "phases_terminated": terminated,
        "outer_reversed": all(alpha[v] == layout.targets[v]
                              for v in outer.vertices),
    }
    final_orient = []
    if terminated:
        final_cycles = find_cycles(g, alpha)
        for chip in m.chips:
            hit = [c for c in final_cycles if chip in c]
            final_orient.append(
                orientation(hit[0], g).value if hit and hit[0].is_contour else None)
    return _finish("cw_internal", assertions,
                   {"initial_orientations": initial_orient,
                    "final_orientations": final_orient,
                    "phase_steps": phase_steps})


# -- recurrence properties (propA, propB) -------------------------------------------


def verify_recurrence_dichotomy(g, s):
    """A state recurs (within |E| steps, with period exactly |E|) iff it
    is a unicycle; non-recurrent orbits still fall into unicycle limit
    cycles of period |E|."""
    uni = is_unicycle(g, s)
    m = g.edge_count
    cur = s.copy()
    returned_at = None
    for t in range(1, m + 1):
        res = run(g, cur, 1)
        cur = res.state
        if cur == s:
            returned_at = t
            break
    rec = detect_recurrence(g, s)
    assertions = {
        "recurs_iff_unicycle": (returned_at is not None) == uni,
        "return_is_full_tour": returned_at == m if uni else returned_at is None,
        "orbit_consistent": (rec.recurrent_at is not None) == uni,
        "limit_is_unicycle": is_unicycle(g, rec.limit_state),
        "limit_period_is_edge_count": rec.period == m,
    }
    return _finish("recurrence_dichotomy", assertions,
                   {"unicycle": uni, "returned_at": returned_at,
                    "transient": rec.transient_prefix})


def verify_full_turn_tour(g, s):
    """Unicycle start: |E| steps are a closed Euler tour (each edge once,
    each vertex's rotor one full turn) and no earlier step returns."""
    report = verify_euler_tour(g, s)
    offsets, targets = g.offsets, g.targets
    rotors = s.rotors.astype(np.int32, copy=True)
    chip = int(s.chip)
    early = False
    for _ in range(g.edge_count - 1):
        a = int(rotors[chip]) + 1
        if a == offsets[chip + 1] - offsets[chip]:
            a = 0
        rotors[chip] = a
        chip = int(targets[offsets[chip] + a])
        if chip == s.chip and np.array_equal(rotors, s.rotors):
            early = True
            break
    assertions = {
        "edges_once": report.edges_once,
        "returned_to_start": report.returned_to_start,
        "full_rotor_turns": report.counts_match_degrees,
        "no_earlier_return": not early,
    }
    return _finish("full_turn_tour", assertions, {"edges": g.edge_count})


# -- suites --------------------------------------------------------------------------


def _trial_seed(master, i):
    return K.mix64((int(master) + (i + 1) * 0x9E3779B97F4A7C15) & K.U64_MASK)


def _dims(rng, grid, lo=4):
    w = int(rng.integers(lo, grid[0] + 1))
    h = int(rng.integers(lo, grid[1] + 1))
    return w, h


def _trial_propA(seed, grid):
    rng = _rng(seed)
    g = random_eulerian_digraph(rng, 20)
    return verify_recurrence_dichotomy(g, random_rotor_state(g, rng))


def _trial_propB(seed, grid):
    rng = _rng(seed)
    g = random_eulerian_digraph(rng, 30)
    return verify_full_turn_tour(g, random_unicycle(g, rng))


def _trial_theorem1(seed, grid):
    rng = _rng(seed)
    g = build_bidirected_grid(*_dims(rng, grid))
    return verify_contour_reversal(g, gen_unicycle_cw(g, rng))


def _trial_lemma1(seed, grid):
    rng = _rng(seed)
    kind = int(rng.integers(4))
    if kind == 0:  # grid boundary ring, clockwise
        w, h = _dims(rng, grid)
        g = build_bidirected_grid(w, h)
        contour = [y * w + x for x, y in _ring_path(0, 0, w - 1, h - 1, True)]
    elif kind == 1:  # grid unit face
        w, h = _dims(rng, grid)
        g = build_bidirected_grid(w, h)
        x = int(rng.integers(w - 1))
        y = int(rng.integers(h - 1))
        contour = [y * w + x, y * w + x + 1, (y + 1) * w + x + 1, (y + 1) * w + x]
    elif kind == 2:  # torus row cycle with adapted rotor order
        w, h = _dims(rng, grid)
        g, contour = build_domino_row_torus(w, h, int(rng.integers(h)))
    else:  # torus unit face
        w, h = _dims(rng, grid)
        g = build_bidirected_torus(w, h)
        x = int(rng.integers(w))
        y = int(rng.integers(h))
        contour = [(y % h) * w + x, (y % h) * w + (x + 1) % w,
                   ((y + 1) % h) * w + (x + 1) % w, ((y + 1) % h) * w + x]
    s, dc = gen_domino_instance(g, contour, rng)
    return verify_flip_ordering(g, s, dc)


def _multicycle_trial(seed, grid, verifier):
    rng = _rng(seed)
    w = int(rng.integers(8, grid[0] + 1))
    h = int(rng.integers(8, grid[1] + 1))
    g = build_bidirected_grid(w, h)
    k = int(rng.integers(1, 6))
    return verifier(g, gen_multicycle(g, k, rng))


def _trial_theorem2(seed, grid):
    return _multicycle_trial(seed, grid, verify_multicycle_reversal)


def _trial_corollary(seed, grid):
    return _multicycle_trial(seed, grid, verify_reversal_ordering)


def _trial_aux(seed, grid):
    return _multicycle_trial(seed, grid, verify_aux_equivalence)


def _trial_cw_internal(seed, grid):
    rng = _rng(seed)
    w = int(rng.integers(8, grid[0] + 1))
    h = int(rng.integers(8, grid[1] + 1))
    g = build_bidirected_grid(w, h)
    return verify_cw_internal(g, gen_cw_internal_instance(g, rng))


SUITES = {
    "propA": _trial_propA,
    "propB": _trial_propB,
    "lemma1": _trial_lemma1,
    "theorem1": _trial_theorem1,
    "theorem2": _trial_theorem2,
    "corollary": _trial_corollary,
    "aux-equiv": _trial_aux,
    "cw-internal": _trial_cw_internal,
}


@dataclass
class SuiteResult:
    suite: str
    trials: int
    failures: int
    seeds: list
    elapsed: float
    first_failure: str | None = None

    def to_json(self):
        return {"suite": self.suite, "trials": self.trials,
                "failures": self.failures, "seeds": self.seeds,
                "elapsed_s": round(self.elapsed, 3),
                "first_failure": self.first_failure}


def run_suite(name, trials, seed, grid=(14, 14)):
    """Run a named suite: each trial generates a fresh instance from a
    per-trial seed and verifies it.  Failing trial seeds are returned for
    replay."""
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    fn = SUITES[name]
    t0 = time.perf_counter()
    fail_seeds = []
    first = None
    for i in range(trials):
        ts = _trial_seed(seed, i)
        try:
            rep = fn(ts, grid)
        except (HarnessError, GraphError) as e:
            rep = CheckReport(name, False, {"instance_valid": False},
                              {"error": str(e)})
        if not rep.passed:
            fail_seeds.append(int(ts))
            if first is None:
                first = f"trial {i} seed {ts}: failed {rep.failed()} {rep.details}"
    return SuiteResult(name, trials, len(fail_seeds), fail_seeds,
                       time.perf_counter() - t0, first)
