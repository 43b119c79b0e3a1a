"""Machine-checked contour reversal.

When a rotor walk's rotor cycle forms a clockwise contour through the
chip, running the walk until the chip returns with every contour rotor
pointing at its predecessor reverses the contour to anticlockwise; along
the way each interior rotor makes exactly one full turn and no exterior
rotor moves at all.  The harness turns that statement (and its relatives
for several disjoint contours, domino orderings, auxiliary graphs, and
clockwise-internal nestings) into randomized replayable checks.

This script verifies one concrete instance assertion by assertion, then
spot-runs every registered suite.
"""

import numpy as np

from rotorwalk.graphs import build_bidirected_grid, find_cycles
from rotorwalk.harness import SUITES, gen_unicycle_cw, run_suite, \
    verify_contour_reversal

g = build_bidirected_grid(6, 6)
rng = np.random.default_rng(2024)
s = gen_unicycle_cw(g, rng)
cycle = find_cycles(g, s.rotors)[0]
print(f"random clockwise-contour unicycle on a 6x6 grid: "
      f"contour {cycle.vertices}, chip {s.chip}")

rep = verify_contour_reversal(g, s)
print(f"\nreversal run: {rep.details['steps']} steps, "
      f"contour of {rep.details['contour_len']} vertices, "
      f"{rep.details['interior']} interior vertices")
for name, ok in rep.assertions.items():
    print(f"  {name:26s} {ok}")
assert rep.passed

print("\nspot-running every suite (40 randomized trials each):")
for name in sorted(SUITES):
    res = run_suite(name, trials=40, seed=7, grid=(10, 10))
    status = "ok" if res.failures == 0 else f"{res.failures} FAILURES"
    print(f"  {name:12s} {res.trials} trials  {status}  ({res.elapsed:.2f}s)")
