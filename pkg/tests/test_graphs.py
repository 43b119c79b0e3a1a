import numpy as np
import pytest

from rotorwalk.graphs import (Cycle, Digraph, GraphError, WalkState,
                              build_bidirected_grid, build_bidirected_torus,
                              find_cycles, is_eulerian, is_unicycle,
                              rotor_subgraph, successor_array)


def test_digraph_csr_layout():
    g = Digraph([[1, 2], [2], [0]])
    assert g.n == 3
    assert list(g.out(0)) == [1, 2]
    assert list(g.out(1)) == [2]
    assert g.degree(0) == 2
    assert g.edge_count == 4
    assert g.edge_index(0, 2) == 1
    with pytest.raises(GraphError):
        g.edge_index(1, 0)


def test_digraph_rejects_bad_input():
    with pytest.raises(GraphError):
        Digraph([[1], [2]])  # target out of range
    with pytest.raises(GraphError):
        Digraph([[0]])  # self loop
    with pytest.raises(GraphError):
        Digraph([[1, 1], [0]])  # duplicate out-edge


def test_embedding_validates_clockwise_rotor_order():
    # center at the origin with neighbours east, north, west; only orders
    # that are cyclic shifts of W, N, E read clockwise
    coords = np.array([[0, 0], [1, 0], [0, 1], [-1, 0]])
    Digraph([[2, 1, 3], [0], [0], [0]], embedding=coords)  # N, E, W: fine
    with pytest.raises(GraphError):
        Digraph([[2, 3, 1], [0], [0], [0]], embedding=coords)  # N, W, E


def test_cycle_helpers():
    c = Cycle((4, 7, 9))
    assert len(c) == 3 and 7 in c and 5 not in c
    assert c.successor(9) == 4
    assert c.predecessor(4) == 9
    assert c.rotated_to_end(7) == (9, 4, 7)
    assert c.edges() == [(4, 7), (7, 9), (9, 4)]
    assert Cycle((1, 2)).is_dimer
    with pytest.raises(GraphError):
        Cycle((3,))
    with pytest.raises(GraphError):
        Cycle((1, 2, 1))


def test_grid_builder_shape():
    g = build_bidirected_grid(3, 2)
    assert g.n == 6
    assert list(g.out(0)) == [3, 1]          # corner: N, E
    assert list(g.out(1)) == [4, 2, 0]       # bottom edge: N, E, W
    assert list(g.out(4)) == [5, 1, 3]       # top edge: E, S, W
    assert is_eulerian(g)


def test_torus_builder_shape():
    g = build_bidirected_torus(3, 3)
    assert g.n == 9
    assert list(g.out(0)) == [3, 1, 6, 2]    # N, E, S, W with wrap
    assert is_eulerian(g)
    with pytest.raises(GraphError):
        build_bidirected_torus(2, 3)


def test_find_cycles_canonical_form():
    g = build_bidirected_grid(2, 2)
    # rotors: 0->1, 1->3, 3->2, 2->0 is the full ring
    rotors = np.zeros(4, dtype=np.int64)
    rotors[0] = g.edge_index(0, 1)
    rotors[1] = g.edge_index(1, 3)
    rotors[3] = g.edge_index(3, 2)
    rotors[2] = g.edge_index(2, 0)
    cycles = find_cycles(g, rotors)
    assert len(cycles) == 1
    assert cycles[0].vertices == (0, 1, 3, 2)  # rotated to least vertex first


def test_find_cycles_multiple_components():
    g = build_bidirected_grid(4, 2)  # ids 0..3 bottom, 4..7 top
    rotors = np.zeros(8, dtype=np.int64)
    for a, b in [(0, 1), (1, 5), (5, 4), (4, 0),   # left square
                 (2, 3), (3, 7), (7, 6), (6, 2)]:  # right square
        rotors[a] = g.edge_index(a, b)
    cycles = find_cycles(g, rotors)
    assert sorted(c.vertices for c in cycles) == [(0, 1, 5, 4), (2, 3, 7, 6)]


def test_successor_and_subgraph():
    g = build_bidirected_grid(2, 2)
    rotors = np.zeros(4, dtype=np.int64)
    succ = successor_array(g, rotors)
    assert succ.shape == (4,)
    for v in range(4):
        assert succ[v] == g.out(v)[0]
    sub = rotor_subgraph(g, rotors)
    assert sub.shape == (4, 2)
    assert [tuple(row) for row in sub] == [(v, int(succ[v])) for v in range(4)]


def test_is_unicycle():
    g = build_bidirected_grid(2, 2)
    rotors = np.zeros(4, dtype=np.int64)
    rotors[0] = g.edge_index(0, 1)
    rotors[1] = g.edge_index(1, 3)
    rotors[3] = g.edge_index(3, 2)
    rotors[2] = g.edge_index(2, 0)
    assert is_unicycle(g, WalkState(rotors, 0))
    # point 2 at 0 instead: 0->1->3->2->0 stays, but 2->0 rerouted to a dimer
    rotors2 = rotors.copy()
    rotors2[2] = g.edge_index(2, 3)
    assert not is_unicycle(g, WalkState(rotors2, 0))


def test_is_eulerian_needs_balance_and_connectivity():
    assert not is_eulerian(Digraph([[1], [2], [0], [0]]))  # 3 unreachable, unbalanced
    assert is_eulerian(Digraph([[1], [2], [0]]))
