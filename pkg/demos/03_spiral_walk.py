"""Anatomy of one long lattice walk.

On the unbounded square lattice, with every cell's initial rotor drawn
from a seeded hash of its coordinates, the rotor walk organizes itself:
the chip's displacement grows subdiffusively (exponent near 1/3), and the
moments when the rotors around the chip close into a clockwise contour
("labels") trace an outward spiral whose loops pack at a roughly constant
radial density.  One medium walk already shows all of it.
"""

import numpy as np

from rotorwalk import analysis as A
from rotorwalk.lattice import build_sample_schedule, run_walk

STEPS = 2_000_000
sched = build_sample_schedule(STEPS)
trace = run_walk(seed=7, steps=STEPS, sample_schedule=sched)
ev = trace.ev

print(f"walk of {STEPS} steps, seed 7: {trace.n_labels} label events")
top_n = int((ev["depth"] == 0).sum())
print(f"  {top_n} top-level, the rest nested inside an open episode "
      f"(deepest: {int(ev['depth'].max())})")
print(f"  episodes exiting away from their entry vertex: "
      f"{trace.counters['offsite_exits']}")

print("\nfirst five labels (entry vertex, time in/out, enclosed area):")
for lab in trace.labels()[:5]:
    print(f"  k={lab.k}  at {lab.vertex}  t=[{lab.t_in}, {lab.t_out}]  "
          f"area {lab.area}")

fit = A.msd_exponent(sched, trace.sample_r2())
print(f"\nsingle-walk displacement exponent: nu = {fit.nu:.3f} "
      f"(ensembles sharpen this toward 1/3; plain diffusion gives 1/2)")

top = {c: ev[c][ev["depth"] == 0]
       for c in ("x", "y", "t_in", "t_out", "depth", "area2")}
gaps = top["t_in"][1:] - top["t_out"][:-1]
n = gaps.size
print(f"mean gap between consecutive top-level labels, late window: "
      f"{gaps[n // 2:].mean():.2f} steps")

prof = A.label_density([top], STEPS)
print(f"radial label density: plateau {prof.plateau:.3f} out to "
      f"~0.6 T^(1/3) (= {0.6 * STEPS ** (1 / 3):.0f} sites), "
      f"~0 beyond 2 T^(1/3)")

last = A.loop_partition(top)[-1]
print(f"\ntop-level label positions "
      f"(o = the last full revolution, radius ~{last.radius:.0f}):")
half, cols, rows = int(last.radius * 1.25), 51, 25


def to_cell(x, y):
    return (y + half) * rows // (2 * half), (x + half) * cols // (2 * half)


img = np.zeros((rows, cols), dtype=np.int64)
frame = (np.abs(top["x"]) < half) & (np.abs(top["y"]) < half)
np.add.at(img, to_cell(top["x"][frame], top["y"][frame]), 1)
shades = " .:-=+*#%@"
chars = [[shades[min(int(v * 9 / img.max()), 9)] for v in row] for row in img]
for x, y in zip(top["x"][last.i:last.j], top["y"][last.i:last.j]):
    if abs(x) < half and abs(y) < half:
        r, c = to_cell(int(x), int(y))
        chars[r][c] = "o"
for row in chars[::-1]:
    print("  " + "".join(row))
