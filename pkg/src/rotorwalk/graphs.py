"""Finite digraphs with a cyclic rotor order on each vertex's out-edges.

Vertices are dense integers ``0..n-1``.  The order in which a vertex's
out-edges are listed *is* its rotor order: a rotor at position ``a`` advances
to ``(a + 1) % d``.  For planar graphs with an embedding this order must be
the clockwise geometric order of the neighbours (y axis pointing up), which
makes a rotor increment a clockwise turn.

Graphs are immutable after construction; the CSR arrays are marked read-only
so a single instance can be shared freely between walkers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class GraphError(ValueError):
    """Malformed graph, state, or cycle."""


@dataclass(frozen=True)
class Cycle:
    """A simple directed cycle, stored as the vertex sequence in edge order.

    ``vertices`` must contain at least two distinct vertices.  Length-2
    cycles (dimers) are legal rotor cycles but carry no orientation.
    """

    vertices: tuple[int, ...]

    def __post_init__(self):
        if len(self.vertices) < 2:
            raise GraphError("a cycle needs at least two vertices")
        if len(set(self.vertices)) != len(self.vertices):
            raise GraphError("cycle vertices must be distinct")

    def __len__(self):
        return len(self.vertices)

    def __contains__(self, v):
        return v in self.vertices

    @property
    def is_dimer(self):
        return len(self.vertices) == 2

    @property
    def is_contour(self):
        """True for cycles long enough to enclose area (3+ vertices)."""
        return len(self.vertices) >= 3

    def successor(self, v):
        i = self.vertices.index(v)
        return self.vertices[(i + 1) % len(self.vertices)]

    def predecessor(self, v):
        i = self.vertices.index(v)
        return self.vertices[i - 1]

    def edges(self):
        """Consecutive (v, w) pairs, including the wrap-around edge."""
        vs = self.vertices
        return [(vs[i], vs[(i + 1) % len(vs)]) for i in range(len(vs))]

    def rotated_to_end(self, v):
        """The same cycle re-listed so that ``v`` comes last."""
        i = self.vertices.index(v)
        return self.vertices[i + 1:] + self.vertices[:i + 1]


@dataclass
class WalkState:
    """One walker: a rotor position per vertex plus the chip location.

    ``rotors[v]`` indexes into ``g.out(v)``.  States are mutable value
    objects owned by a single walker; copy before sharing.
    """

    rotors: np.ndarray
    chip: int

    def copy(self):
        return WalkState(self.rotors.copy(), int(self.chip))

    def __eq__(self, other):
        if not isinstance(other, WalkState):
            return NotImplemented
        return self.chip == other.chip and np.array_equal(self.rotors, other.rotors)


@dataclass
class Multicycle:
    """A rotor configuration whose rotor subgraph has k cycles, plus one
    chip on each cycle (``chips[i]`` lies on the i-th cycle)."""

    rotors: np.ndarray
    chips: tuple[int, ...]


class Digraph:
    """Immutable digraph in CSR form with per-vertex rotor (out-edge) order.

    Parameters
    ----------
    out_edges : sequence of int sequences
        ``out_edges[v]`` lists v's neighbours in rotor order.
    embedding : (n, 2) array, optional
        Planar coordinates.  When given, every vertex's out-edge order is
        validated to be the clockwise order of its neighbours (up to a
        cyclic shift).
    """

    __slots__ = ("n", "offsets", "targets", "embedding")

    def __init__(self, out_edges, embedding=None, validate=True):
        self.n = len(out_edges)
        if self.n == 0:
            raise GraphError("empty graph")
        degs = np.array([len(e) for e in out_edges], dtype=np.int64)
        self.offsets = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(degs, out=self.offsets[1:])
        flat = [w for edges in out_edges for w in edges]
        self.targets = np.array(flat, dtype=np.int32)
        if embedding is not None:
            embedding = np.asarray(embedding)
            if embedding.shape != (self.n, 2):
                raise GraphError("embedding must be an (n, 2) array")
            if np.issubdtype(embedding.dtype, np.integer):
                embedding = embedding.astype(np.int64)
        self.embedding = embedding
        if validate:
            self._validate()
        self.offsets.flags.writeable = False
        self.targets.flags.writeable = False
        if self.embedding is not None:
            self.embedding.flags.writeable = False

    def _validate(self):
        for v in range(self.n):
            out = self.out(v)
            if len(out) == 0:
                raise GraphError(f"vertex {v} has no out-edges")
            if np.any(out < 0) or np.any(out >= self.n):
                raise GraphError(f"vertex {v} has an out-of-range target")
            if np.any(out == v):
                raise GraphError(f"vertex {v} has a self-loop")
            if len(set(out.tolist())) != len(out):
                raise GraphError(f"vertex {v} has duplicate out-edges")
        if self.embedding is not None:
            pts = self.embedding
            if len(np.unique(pts, axis=0)) != self.n:
                raise GraphError("embedding has coincident vertices")
            for v in range(self.n):
                if not self._clockwise_order_ok(v):
                    raise GraphError(
                        f"out-edges of vertex {v} are not in clockwise order")

    def _clockwise_order_ok(self, v):
        out = self.out(v)
        if len(out) <= 2:
            return True  # any order of <=2 directions is a clockwise order
        px, py = (float(c) for c in self.embedding[v])
        ang = [math.atan2(float(self.embedding[w][1]) - py,
                          float(self.embedding[w][0]) - px) for w in out]
        # clockwise = descending polar angle, cyclically
        order = sorted(range(len(out)), key=lambda i: -ang[i])
        d = len(out)
        for shift in range(d):
            if all(order[(shift + i) % d] == i for i in range(d)):
                return True
        return False

    # -- accessors ---------------------------------------------------------

    @property
    def vertex_count(self):
        return self.n

    @property
    def edge_count(self):
        return int(self.offsets[-1])

    def degree(self, v):
        return int(self.offsets[v + 1] - self.offsets[v])

    def out(self, v):
        """Read-only view of v's targets in rotor order."""
        return self.targets[self.offsets[v]:self.offsets[v + 1]]

    def has_edge(self, v, w):
        return bool(np.any(self.out(v) == w))

    def edge_index(self, v, w):
        """Rotor position of the edge v->w; GraphError if absent."""
        hits = np.flatnonzero(self.out(v) == w)
        if len(hits) == 0:
            raise GraphError(f"no edge {v}->{w}")
        return int(hits[0])

    def __eq__(self, other):
        if not isinstance(other, Digraph):
            return NotImplemented
        same = (self.n == other.n
                and np.array_equal(self.offsets, other.offsets)
                and np.array_equal(self.targets, other.targets))
        if not same:
            return False
        if (self.embedding is None) != (other.embedding is None):
            return False
        return self.embedding is None or np.array_equal(self.embedding, other.embedding)

    # -- text serialization --------------------------------------------------

    def to_text(self):
        """Plain-text form: 'vertices N', one 'v: w1 w2 ...' line per
        vertex in rotor order, then optional 'coords v: x y' lines."""
        lines = [f"vertices {self.n}"]
        for v in range(self.n):
            lines.append(f"{v}: " + " ".join(str(int(w)) for w in self.out(v)))
        if self.embedding is not None:
            integral = np.issubdtype(self.embedding.dtype, np.integer)
            for v in range(self.n):
                x, y = self.embedding[v]
                if integral:
                    lines.append(f"coords {v}: {int(x)} {int(y)}")
                else:
                    lines.append(f"coords {v}: {x!r} {y!r}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text):
        n = None
        out_edges = {}
        coords = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("vertices"):
                n = int(line.split()[1])
            elif line.startswith("coords"):
                head, vals = line[len("coords"):].split(":", 1)
                v = int(head)
                x, y = vals.split()
                coords[v] = (float(x), float(y))
            else:
                head, vals = line.split(":", 1)
                v = int(head)
                out_edges[v] = [int(w) for w in vals.split()]
        if n is None:
            raise GraphError("missing 'vertices N' header")
        if sorted(out_edges) != list(range(n)):
            raise GraphError("vertex lines do not cover 0..n-1")
        embedding = None
        if coords:
            if sorted(coords) != list(range(n)):
                raise GraphError("coords lines do not cover 0..n-1")
            pts = np.array([coords[v] for v in range(n)], dtype=np.float64)
            if np.all(pts == np.round(pts)):
                pts = pts.astype(np.int64)
            embedding = pts
        return Digraph([out_edges[v] for v in range(n)], embedding=embedding)


# -- rotor subgraph helpers ---------------------------------------------------


def check_state(g, s):
    """Raise GraphError unless s is a well-formed state for g."""
    if s.rotors.shape != (g.n,):
        raise GraphError("rotor array has wrong length")
    degs = g.offsets[1:] - g.offsets[:-1]
    if np.any(s.rotors < 0) or np.any(s.rotors >= degs):
        raise GraphError("rotor index out of range")
    if not (0 <= s.chip < g.n):
        raise GraphError("chip off the vertex set")


def successor_array(g, rotors):
    """succ[v] = the vertex v's rotor currently points at."""
    rotors = np.asarray(rotors)
    return g.targets[g.offsets[:-1] + rotors]


def rotor_subgraph(g, rotors):
    """The n directed edges (v, succ(v)) selected by the rotors."""
    succ = successor_array(g, rotors)
    return np.stack([np.arange(g.n, dtype=np.int64), succ.astype(np.int64)], axis=1)


def find_cycles(g, rotors):
    """All cycles of the rotor subgraph (a functional graph).

    Three-colour chain marking; every vertex is visited once.  Cycles are
    returned with the smallest vertex first and sorted by that vertex, so
    the output is deterministic.
    """
    succ = successor_array(g, rotors)
    color = np.zeros(g.n, dtype=np.uint8)  # 0 new, 1 on current chain, 2 done
    cycles = []
    for v0 in range(g.n):
        if color[v0]:
            continue
        path = []
        v = v0
        while color[v] == 0:
            color[v] = 1
            path.append(v)
            v = int(succ[v])
        if color[v] == 1:  # closed a new cycle inside this chain
            i = path.index(v)
            cycles.append(path[i:])
        for u in path:
            color[u] = 2
    out = []
    for cyc in cycles:
        j = cyc.index(min(cyc))
        out.append(Cycle(tuple(cyc[j:] + cyc[:j])))
    out.sort(key=lambda c: c.vertices[0])
    return out


def is_unicycle(g, s):
    """True iff the rotor subgraph has exactly one cycle and the chip is on it."""
    cycles = find_cycles(g, s.rotors)
    return len(cycles) == 1 and s.chip in cycles[0]


# -- Eulerian check -----------------------------------------------------------


def _adjacency(g, reverse=False):
    adj = [[] for _ in range(g.n)]
    for v in range(g.n):
        for w in g.out(v):
            if reverse:
                adj[int(w)].append(v)
            else:
                adj[v].append(int(w))
    return adj


def _reaches_all(adj, n, start=0):
    seen = bytearray(n)
    seen[start] = 1
    stack = [start]
    count = 1
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if not seen[w]:
                seen[w] = 1
                count += 1
                stack.append(w)
    return count == n


def is_eulerian(g):
    """In-degree equals out-degree everywhere and the graph is strongly
    connected, i.e. a closed walk using every edge once exists."""
    out_deg = g.offsets[1:] - g.offsets[:-1]
    in_deg = np.bincount(g.targets, minlength=g.n)
    if not np.array_equal(out_deg, in_deg):
        return False
    return (_reaches_all(_adjacency(g), g.n)
            and _reaches_all(_adjacency(g, reverse=True), g.n))


# -- builders -----------------------------------------------------------------


def build_bidirected_grid(width, height):
    """Bidirected W x H grid; vertex (x, y) has id y*width + x and its
    out-edges list the present N, E, S, W neighbours in that (clockwise
    from north) order."""
    if width < 2 or height < 2:
        raise GraphError("grid needs both dimensions >= 2")

    def vid(x, y):
        return y * width + x

    out_edges = []
    coords = np.empty((width * height, 2), dtype=np.int64)
    for y in range(height):
        for x in range(width):
            nbrs = []
            if y + 1 < height:
                nbrs.append(vid(x, y + 1))
            if x + 1 < width:
                nbrs.append(vid(x + 1, y))
            if y - 1 >= 0:
                nbrs.append(vid(x, y - 1))
            if x - 1 >= 0:
                nbrs.append(vid(x - 1, y))
            out_edges.append(nbrs)
            coords[vid(x, y)] = (x, y)
    return Digraph(out_edges, embedding=coords)


def build_bidirected_torus(width, height):
    """Bidirected torus grid with wrap-around; out-edge order N, E, S, W.
    No embedding is attached (the torus is not planar).  Needs both sides
    >= 3 so opposite neighbours stay distinct."""
    if width < 3 or height < 3:
        raise GraphError("torus needs both dimensions >= 3")

    def vid(x, y):
        return (y % height) * width + (x % width)

    out_edges = []
    for y in range(height):
        for x in range(width):
            out_edges.append([vid(x, y + 1), vid(x + 1, y),
                              vid(x, y - 1), vid(x - 1, y)])
    return Digraph(out_edges)
