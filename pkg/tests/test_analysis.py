import math

import numpy as np
import pytest

from rotorwalk import analysis as A

TWO_PI = 2 * math.pi


def spiral_points(theta):
    """Points whose unwrapped clockwise winding angle is exactly theta."""
    return np.cos(theta), -np.sin(theta)


def test_spiral_angles_unwrap_clockwise():
    # quarter turns, then further half-turn-or-less hops past one full turn
    th = np.array([0.0, math.pi / 2, math.pi, 3 * math.pi / 2, TWO_PI,
                   TWO_PI + 2.0, TWO_PI + 4.5])
    x, y = spiral_points(th)
    got = A.spiral_angles(x, y)
    assert np.allclose(got, th, atol=1e-12)


def test_spiral_angles_anticlockwise_goes_negative():
    th = np.linspace(0, 3.0, 20)
    x, y = np.cos(th), np.sin(th)
    got = A.spiral_angles(x, y)
    assert np.allclose(got, -th, atol=1e-12)


def test_fit_asymptote_exact_recovery():
    n = np.arange(1, 501)
    values = 3.0 + 5.0 * n ** (-0.5)
    fit = A.fit_asymptote(values, 0.5, window=(10, 500))
    assert abs(fit.b_est - 3.0) < 1e-9
    assert abs(fit.a_est - 5.0) < 1e-9
    assert fit.residual < 1e-9 and not fit.low_confidence


def test_fit_asymptote_flags_thin_windows():
    fit = A.fit_asymptote(np.ones(6), 0.25, window=(1, 6))
    assert fit.low_confidence


def make_spiral_walk(rng, b, n_labels, jitter=0.0):
    th = np.cumsum(rng.uniform(0.2, 0.5, size=n_labels)) + 1.0
    r = b * th * (1.0 + jitter * rng.standard_normal(n_labels))
    x = r * np.cos(th)
    y = -r * np.sin(th)
    return {"x": x, "y": y, "depth": np.zeros(n_labels, dtype=np.int64)}


def test_rms_ratio_recovers_spiral_coefficient(rng):
    # noisy Archimedean spirals r = b*theta: the fitted asymptote must
    # come back within 2% of b
    b = 2.0
    ensemble = [make_spiral_walk(rng, b, 3000, jitter=0.1) for _ in range(40)]
    ratio, fit = A.rms_ratio(ensemble)
    assert abs(fit.b_est - b) / b < 0.02
    assert not fit.low_confidence


def test_rms_ratio_vanishes_for_circles():
    th = np.arange(1, 2000) * 0.3
    x, y = spiral_points(th)
    walk = {"x": 5 * x, "y": 5 * y, "depth": np.zeros(th.size, dtype=np.int64)}
    ratio, fit = A.rms_ratio([walk, dict(walk)])
    assert ratio[-1] < 0.1 * ratio[10]
    assert ratio[-1] == pytest.approx(5 / th[-1], rel=1e-6)


def test_rms_ratio_single_walk_low_confidence(rng):
    ratio, fit = A.rms_ratio([make_spiral_walk(rng, 1.0, 200)])
    assert fit.low_confidence


def gap_walk(t_in, t_out, depth=None):
    n = len(t_in)
    return {"t_in": np.asarray(t_in, dtype=np.int64),
            "t_out": np.asarray(t_out, dtype=np.int64),
            "depth": np.zeros(n, dtype=np.int64) if depth is None
            else np.asarray(depth, dtype=np.int64)}


def test_gap_stats_definition_and_translation_invariance(rng):
    walks = []
    for _ in range(10):
        t_in = np.cumsum(rng.integers(5, 30, size=300))
        t_out = t_in + rng.integers(1, 8, size=300)
        walks.append(gap_walk(t_in, t_out))
    gaps, fit = A.gap_stats(walks)
    assert gaps[0] == np.mean([w["t_in"][1] - w["t_out"][0] for w in walks])
    shifted = [gap_walk(w["t_in"] + 12345, w["t_out"] + 12345) for w in walks]
    gaps2, fit2 = A.gap_stats(shifted)
    assert np.array_equal(gaps, gaps2)
    assert fit.b_est == fit2.b_est


def test_gap_stats_ignores_nested_labels():
    # one nested episode inside the first top-level one must not perturb
    # the top-level gap sequence
    plain = gap_walk([10, 30, 50], [20, 40, 60])
    nested = gap_walk([10, 12, 30, 50], [20, 14, 40, 60], depth=[0, 1, 0, 0])
    g1, _ = A.gap_stats([plain, plain])
    g2, _ = A.gap_stats([nested, nested])
    assert np.array_equal(g1, g2)
    g3, _ = A.gap_stats([nested, nested], include_nested=True)
    assert not np.array_equal(g1, g3)


def test_gap_fit_window_excludes_straggler_tails():
    # two walks run to 400 labels with short gaps; the other fifty stop at
    # 100.  The default window must stay where nearly all walks still
    # contribute, so the asymptote reflects the common gap of 7
    walks = [gap_walk(np.arange(100) * 10, np.arange(100) * 10 + 3)
             for _ in range(50)]
    long_t = np.arange(400) * 4
    walks += [gap_walk(long_t, long_t + 1) for _ in range(2)]
    gaps, fit = A.gap_stats(walks)
    assert fit.window[1] <= 99
    assert abs(fit.b_est - 7.0) < 0.2


def test_label_density_uniform_disk_is_flat():
    # every lattice site inside radius 40 holds exactly one label: the
    # profile is 1 at the origin and 1 across the plateau window, and
    # empty past the subdiffusive range
    R = 40
    xs = np.arange(-R, R + 1)
    gx, gy = np.meshgrid(xs, xs, indexing="ij")
    keep = np.hypot(gx, gy) <= R
    walk = {"x": gx[keep].ravel(), "y": gy[keep].ravel(),
            "depth": np.zeros(int(keep.sum()), dtype=np.int64)}
    steps = int((20 / 0.6) ** 3)  # plateau window ends at 20
    prof = A.label_density([walk, dict(walk)], steps)
    assert prof.peak == pytest.approx(1.0)
    assert prof.plateau == pytest.approx(1.0)
    assert prof.falloff_max == 0.0
    assert prof.walks == 2
    assert prof.bin_edges[1] == 1.0  # origin site alone in the first bin


def test_label_density_rejects_empty_ensemble():
    with pytest.raises(A.AnalysisError):
        A.label_density([], 1000)


def test_mean_square_displacement_is_plain_mean():
    t = np.array([1.0, 10.0, 100.0])
    mean = A.mean_square_displacement([t, 4 * t])
    assert np.allclose(mean, 2.5 * t)


def test_msd_exponent_exact_power_laws():
    t = np.logspace(0, 6, 60)
    assert A.msd_exponent(t, t).nu == pytest.approx(0.5, abs=1e-9)
    assert A.msd_exponent(t, t ** (2 / 3)).nu == pytest.approx(1 / 3, abs=1e-9)
    fit = A.msd_exponent(t, t, window_decades=2.0)
    assert fit.window[1] / fit.window[0] == pytest.approx(100.0)
    with pytest.raises(A.AnalysisError):
        A.msd_exponent(t, np.zeros_like(t))


def loop_walk(th, r, t_in=None):
    x = r * np.cos(th)
    y = -r * np.sin(th)
    n = th.size
    return {"x": x, "y": y,
            "t_in": np.arange(n, dtype=np.int64) if t_in is None else t_in,
            "area2": np.full(n, -2, dtype=np.int64),
            "depth": np.zeros(n, dtype=np.int64)}


def test_loop_partition_equal_steps():
    th = np.arange(60) * (math.pi / 6)  # 12 labels per turn, 5 turns
    loops = A.loop_partition(loop_walk(th, np.full(60, 10.0)))
    assert [(lp.i, lp.j) for lp in loops] == [(0, 12), (12, 24), (24, 36), (36, 48)]
    for lp in loops:
        assert lp.dt == 12 and lp.radius == pytest.approx(10.0)
        assert lp.dr == pytest.approx(0.0)
        assert lp.area == pytest.approx(13.0)  # 13 labels of area 1


def test_loop_growth_slope_exact_square_law():
    loops = [A.LoopStat(0, 1, r, r * r, 0.0, 1.0)
             for r in np.geomspace(6, 600, 25)]
    slope, used = A.loop_growth_slope(loops)
    assert slope == pytest.approx(2.0, abs=1e-12)
    assert used == 25
    with pytest.raises(A.AnalysisError):
        A.loop_growth_slope(loops[:2])


def test_pooled_loops_concatenates(rng):
    th = np.arange(40) * 0.5
    w = loop_walk(th, 3.0 + 0.1 * th)
    single = A.loop_partition(w)
    pooled = A.pooled_loops([w, w])
    assert len(pooled) == 2 * len(single)
