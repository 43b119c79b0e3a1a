"""Rotor-router walks: exact finite-graph verification and large-scale
lattice simulation.

The finite side (graphs, engine, geometry, harness) machine-checks the
reversibility properties of rotor walks on Eulerian digraphs; the
lattice side (lattice, analysis) runs long walks on the unbounded square
grid, records clockwise-contour label events, and reduces them to spiral,
gap, density and subdiffusion statistics.
"""

from .analysis import (AnalysisError, DensityProfile, ExponentFit, LoopStat,
                       SpiralFit, fit_asymptote, gap_stats, label_density,
                       loop_growth_slope, loop_partition, mean_ratio,
                       mean_square_displacement, msd_exponent, pooled_loops,
                       rms_ratio, spiral_angles)
from .engine import (EngineError, EulerTourReport, RecurrenceResult,
                     RunResult, StepRecord, detect_recurrence,
                     dump_trajectory, load_trajectory, run, step,
                     verify_euler_tour)
from .geometry import (GeometryError, Orientation, PointLocation,
                       interior_vertices, orientation, orientation_of_points,
                       point_in_polygon, polygon_of, signed_area,
                       signed_area2)
from .graphs import (Cycle, Digraph, GraphError, Multicycle, WalkState,
                     build_bidirected_grid, build_bidirected_torus,
                     check_state, find_cycles, is_eulerian, is_unicycle,
                     rotor_subgraph, successor_array)
from .harness import (CheckReport, HarnessError, SUITES, SuiteResult,
                      build_auxiliary_unicycle, gen_cw_internal_instance,
                      gen_domino_instance, gen_multicycle, gen_unicycle_cw,
                      multicycle_from_rings, random_eulerian_digraph,
                      random_rotor_state, random_unicycle, run_suite,
                      run_to_recurrent, verify_aux_equivalence,
                      verify_contour_reversal, verify_cw_internal,
                      verify_flip_ordering, verify_full_turn_tour,
                      verify_multicycle_reversal, verify_recurrence_dichotomy,
                      verify_reversal_ordering)
from .lattice import (CheckpointError, DetectionCapError, LabelEvent,
                      LatticeEnvironment, WalkTrace, WeakReversibilityError,
                      build_sample_schedule, detect_contour,
                      read_events_jsonl, read_samples_csv, run_random_walk_control,
                      run_torus_walk, run_walk, run_walk_reference, sim_step)

__version__ = "0.1.0"
