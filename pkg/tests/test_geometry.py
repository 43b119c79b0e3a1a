import numpy as np
import pytest

from rotorwalk.geometry import (GeometryError, Orientation, PointLocation,
                                interior_vertices, orientation,
                                orientation_of_points, point_in_polygon,
                                signed_area, signed_area2)
from rotorwalk.graphs import Cycle, build_bidirected_grid

UNIT_ACW = [(0, 0), (1, 0), (1, 1), (0, 1)]
UNIT_CW = list(reversed(UNIT_ACW))


def test_signed_area2_unit_square():
    assert signed_area2(UNIT_ACW) == 2
    assert signed_area2(UNIT_CW) == -2
    assert signed_area(UNIT_ACW) == 1.0


def test_signed_area2_is_exact_for_huge_coordinates():
    # shoelace on int64-scale coordinates must not overflow or round
    m = 2**40
    square = [(m, m), (m + 3, m), (m + 3, m + 3), (m, m + 3)]
    assert signed_area2(square) == 18


def test_signed_area2_rejects_degenerate_input():
    with pytest.raises(GeometryError):
        signed_area2([(0, 0), (1, 1)])
    with pytest.raises(GeometryError):
        signed_area2([(0.5, 0.5), (1, 0), (0, 1)])


def test_orientation_of_points():
    assert orientation_of_points(UNIT_ACW) is Orientation.ANTICLOCKWISE
    assert orientation_of_points(UNIT_CW) is Orientation.CLOCKWISE
    with pytest.raises(GeometryError):
        orientation_of_points([(0, 0), (1, 0), (2, 0)])  # collinear


def test_point_in_polygon_square():
    poly = [(0, 0), (4, 0), (4, 4), (0, 4)]
    assert point_in_polygon((2, 2), poly) is PointLocation.INSIDE
    assert point_in_polygon((5, 2), poly) is PointLocation.OUTSIDE
    assert point_in_polygon((0, 0), poly) is PointLocation.BOUNDARY
    assert point_in_polygon((2, 0), poly) is PointLocation.BOUNDARY
    assert point_in_polygon((4, 3), poly) is PointLocation.BOUNDARY
    assert point_in_polygon((-1, 0), poly) is PointLocation.OUTSIDE


def test_point_in_polygon_concave():
    # a U shape: the notch between the arms lies outside
    poly = [(0, 0), (5, 0), (5, 4), (3, 4), (3, 2), (2, 2), (2, 4), (0, 4)]
    assert point_in_polygon((1, 3), poly) is PointLocation.INSIDE
    assert point_in_polygon((4, 3), poly) is PointLocation.INSIDE
    assert point_in_polygon((2, 3), poly) is PointLocation.BOUNDARY
    assert point_in_polygon((2, 2), poly) is PointLocation.BOUNDARY
    assert point_in_polygon((5, 5), poly) is PointLocation.OUTSIDE


def test_point_in_polygon_ray_through_vertex():
    # +x ray from the query passes exactly through polygon vertices;
    # the half-open rule must still count one crossing
    diamond = [(2, 0), (4, 2), (2, 4), (0, 2)]
    assert point_in_polygon((1, 2), diamond) is PointLocation.INSIDE
    assert point_in_polygon((-1, 2), diamond) is PointLocation.OUTSIDE
    assert point_in_polygon((2, 2), diamond) is PointLocation.INSIDE


def test_orientation_of_embedded_cycle():
    g = build_bidirected_grid(3, 3)
    ring = Cycle((0, 1, 2, 5, 8, 7, 6, 3))  # anticlockwise boundary walk
    assert orientation(ring, g) is Orientation.ANTICLOCKWISE
    back = Cycle(tuple(reversed(ring.vertices)))
    assert orientation(back, g) is Orientation.CLOCKWISE
    with pytest.raises(GeometryError):
        orientation(Cycle((0, 1)), g)


def test_interior_vertices_of_grid_rings():
    g = build_bidirected_grid(5, 5)
    outer = [0, 1, 2, 3, 4, 9, 14, 19, 24, 23, 22, 21, 20, 15, 10, 5]
    inner = interior_vertices(Cycle(tuple(outer)), g)
    assert inner == {6, 7, 8, 11, 12, 13, 16, 17, 18}
    face = Cycle((0, 1, 6, 5))
    assert interior_vertices(face, g) == set()
