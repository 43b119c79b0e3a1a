"""Rotor walks on small finite graphs.

A rotor walk is fully deterministic: every vertex owns a rotor that sweeps
its out-edges cyclically, and the chip always follows the freshly advanced
rotor.  The pair (rotor configuration, chip position) is the whole state,
so on a finite graph the orbit is eventually periodic.  When in-degree
equals out-degree everywhere, the recurrent states are exactly the
unicycles (rotor subgraph with one directed cycle, chip on it) and a
single period of the orbit traces a closed Euler tour.  This script walks
through all three facts on a bidirected 3x3 grid.
"""

import numpy as np

from rotorwalk.engine import detect_recurrence, run, verify_euler_tour
from rotorwalk.graphs import (WalkState, build_bidirected_grid, find_cycles,
                              is_unicycle)

g = build_bidirected_grid(3, 3)
start = WalkState(np.zeros(g.n, dtype=np.int64), chip=0)

print(f"bidirected 3x3 grid: {g.n} vertices, {g.edge_count} directed edges")
print("\nfirst twelve steps from the all-zero rotor state, chip at 0:")
res = run(g, start, 12, record=True)
for r in res.records:
    print(f"  t={r.t:2d}  {r.src} -> {r.dst}")

rec = detect_recurrence(g, start)
print(f"\norbit structure from that start: transient {rec.transient_prefix} "
      f"steps, then period {rec.period} (= |E| = {g.edge_count})")

limit = rec.limit_state
cycle = find_cycles(g, limit.rotors)[0]
print(f"the limit state is a unicycle: {is_unicycle(g, limit)}, "
      f"rotor cycle {cycle.vertices}, chip {limit.chip} on it")

tour = verify_euler_tour(g, limit)
print(f"\none full period from the unicycle is a closed Euler tour:")
print(f"  steps taken        {tour.steps}")
print(f"  every edge once    {tour.edges_once}")
print(f"  back to the start  {tour.returned_to_start}")
print(f"  departures = deg   {tour.counts_match_degrees}")
