"""Exact planar predicates for polygons on the integer lattice.

All area and membership computations on integer coordinates are done in
exact integer arithmetic: doubled signed areas are ints, point location
uses cross-multiplied comparisons.  Clockwise means negative signed area
(y axis up), matching the rotor convention where an increment is a
clockwise turn.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .graphs import Cycle, GraphError


class GeometryError(ValueError):
    """Degenerate or unsupported geometric input."""


class Orientation(Enum):
    CLOCKWISE = "clockwise"
    ANTICLOCKWISE = "anticlockwise"


class PointLocation(Enum):
    INSIDE = "inside"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


def _as_int_points(points):
    pts = np.asarray(points)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise GeometryError("points must be an (L, 2) array")
    if not np.issubdtype(pts.dtype, np.integer):
        if np.issubdtype(pts.dtype, np.floating) and np.all(pts == np.round(pts)):
            pts = pts.astype(np.int64)
        else:
            raise GeometryError("exact predicates need integer coordinates")
    return pts.tolist()  # python ints: no overflow anywhere downstream


def signed_area2(points):
    """Twice the signed shoelace area, as an exact int.

    Positive for anticlockwise vertex order, negative for clockwise
    (y axis pointing up).  Needs at least 3 points.
    """
    pts = _as_int_points(points)
    if len(pts) < 3:
        raise GeometryError("a polygon needs at least 3 vertices")
    s = 0
    for i in range(len(pts)):
        x0, y0 = pts[i]
        x1, y1 = pts[(i + 1) % len(pts)]
        s += x0 * y1 - x1 * y0
    return s


def signed_area(points):
    """Signed shoelace area as a float; the unit square listed
    anticlockwise gives +1."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise GeometryError("a polygon needs at least 3 vertices")
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def polygon_of(cycle, g):
    """Embedded coordinates of a cycle's vertices, in cycle order."""
    if g.embedding is None:
        raise GeometryError("graph has no embedding")
    return np.asarray(g.embedding)[list(cycle.vertices)]


def orientation_of_points(points):
    a2 = signed_area2(points)
    if a2 == 0:
        raise GeometryError("degenerate polygon (zero area)")
    return Orientation.CLOCKWISE if a2 < 0 else Orientation.ANTICLOCKWISE


def orientation(cycle, g):
    """Traversal orientation of an embedded cycle.  Dimers have no
    orientation and raise GeometryError."""
    if cycle.is_dimer:
        raise GeometryError("orientation is undefined for dimers")
    return orientation_of_points(polygon_of(cycle, g))


def _on_segment(qx, qy, ax, ay, bx, by):
    if (bx - ax) * (qy - ay) != (by - ay) * (qx - ax):
        return False
    return min(ax, bx) <= qx <= max(ax, bx) and min(ay, by) <= qy <= max(ay, by)


def point_in_polygon(q, points):
    """Locate an integer point relative to a simple integer polygon.

    Exact ray casting toward +x with the half-open edge rule
    ``(ay > qy) != (by > qy)``; crossing positions are compared by
    cross-multiplication so no rounding ever occurs.
    """
    pts = _as_int_points(points)
    if len(pts) < 3:
        raise GeometryError("a polygon needs at least 3 vertices")
    qx, qy = int(q[0]), int(q[1])
    crossings = 0
    for i in range(len(pts)):
        ax, ay = pts[i]
        bx, by = pts[(i + 1) % len(pts)]
        if _on_segment(qx, qy, ax, ay, bx, by):
            return PointLocation.BOUNDARY
        if (ay > qy) != (by > qy):
            # x coordinate of the edge at height qy is ax + (qy-ay)(bx-ax)/(by-ay);
            # compare against qx without dividing
            lhs = (bx - ax) * (qy - ay)
            rhs = (qx - ax) * (by - ay)
            if (lhs > rhs) if (by - ay) > 0 else (lhs < rhs):
                crossings ^= 1
    return PointLocation.INSIDE if crossings else PointLocation.OUTSIDE


def interior_vertices(cycle, g):
    """Vertex ids strictly inside an embedded cycle."""
    if not cycle.is_contour:
        raise GeometryError("dimers enclose no vertices")
    poly = polygon_of(cycle, g)
    pts = np.asarray(g.embedding)
    xlo, ylo = poly.min(axis=0)
    xhi, yhi = poly.max(axis=0)
    on_cycle = set(cycle.vertices)
    inside = set()
    box = np.flatnonzero((pts[:, 0] > xlo) & (pts[:, 0] < xhi)
                         & (pts[:, 1] > ylo) & (pts[:, 1] < yhi))
    for v in box.tolist():
        if v in on_cycle:
            continue
        if point_in_polygon(pts[v], poly) is PointLocation.INSIDE:
            inside.add(v)
    return inside
