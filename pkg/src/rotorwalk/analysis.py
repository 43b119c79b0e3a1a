"""Statistics of label events and displacement samples.

All functions take ensembles of per-walk label events, each a dict of
equal-length arrays with keys ``k, x, y, t_in, t_out, len, area2, depth``
(what ``WalkTrace.labels()`` and ``read_events_jsonl`` return).  Nested
events (depth > 0) are excluded from spiral and gap statistics by
default, since the label sequence of interest is the top-level one;
density counts every label.

Angles are unwrapped clockwise-positive: a label sequence spiralling
clockwise around the origin has increasing theta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


class AnalysisError(ValueError):
    pass


def _filtered(ev, include_nested):
    if include_nested:
        return ev
    m = np.asarray(ev["depth"]) == 0
    return {key: np.asarray(col)[m] for key, col in ev.items()}


def spiral_angles(x, y):
    """Unwrapped winding angle of a point sequence, clockwise positive.

    Successive increments are wrapped to [-pi, pi), so the result tracks
    the continuous winding of a path whose angular step stays below a
    half turn."""
    raw = -np.arctan2(np.asarray(y, dtype=float), np.asarray(x, dtype=float))
    if raw.size == 0:
        return raw
    d = np.mod(np.diff(raw) + math.pi, TWO_PI) - math.pi
    out = np.empty_like(raw)
    out[0] = raw[0]
    np.cumsum(d, out=out[1:])
    out[1:] += raw[0]
    return out


class _IndexedSums:
    """Per-label-index sums across walks; each walk contributes a prefix,
    so counts are non-increasing in the index."""

    def __init__(self, cols):
        self.sums = np.zeros((64, cols))
        self.cnt = np.zeros(64, dtype=np.int64)

    def add(self, rows):
        m = rows.shape[0]
        if m > self.cnt.shape[0]:
            size = self.cnt.shape[0]
            while size < m:
                size *= 2
            sums = np.zeros((size, self.sums.shape[1]))
            cnt = np.zeros(size, dtype=np.int64)
            sums[:self.sums.shape[0]] = self.sums
            cnt[:self.cnt.shape[0]] = self.cnt
            self.sums, self.cnt = sums, cnt
        self.sums[:m] += rows
        self.cnt[:m] += 1

    def means(self, min_count=1):
        n = int(np.searchsorted(-self.cnt, -min_count, side="right"))
        return self.sums[:n] / self.cnt[:n, None], self.cnt[:n]


@dataclass
class SpiralFit:
    """Least-squares fit of a per-index statistic to c + A * n**(-p)."""

    b_est: float          # the asymptote c
    a_est: float          # the correction amplitude A
    correction: float     # the fixed exponent p
    window: tuple         # (n_lo, n_hi) of indices used
    residual: float       # rms residual inside the window
    low_confidence: bool  # too few points or walks to trust the fit


def fit_asymptote(values, p, window=None, min_points=10):
    """Fit values[n-1] ~ c + A * n**(-p) by least squares.

    ``window`` is an inclusive 1-based index range; the default is the
    upper half of the finite entries (skipping the first few indices
    where small-n noise dominates)."""
    values = np.asarray(values, dtype=float)
    n_all = np.arange(1, values.size + 1)
    finite = np.isfinite(values)
    if window is None:
        hi = int(n_all[finite][-1]) if finite.any() else 0
        window = (max(8, hi // 2), hi)
    lo, hi = window
    mask = finite & (n_all >= lo) & (n_all <= hi)
    m = int(mask.sum())
    if m < 2:
        c = float(np.nanmean(values)) if finite.any() else math.nan
        return SpiralFit(c, 0.0, p, (lo, hi), math.nan, True)
    basis = np.stack([np.ones(m), n_all[mask].astype(float) ** (-p)], axis=1)
    coef, *_ = np.linalg.lstsq(basis, values[mask], rcond=None)
    resid = values[mask] - basis @ coef
    rms = float(np.sqrt(np.mean(resid ** 2)))
    return SpiralFit(float(coef[0]), float(coef[1]), p, (lo, hi), rms,
                     m < min_points)


def _fit_window(cnt, nwalks):
    """Default fit window: indices reached by nearly every walk.  Means
    over indices that only long-label walks reach are biased (walks that
    fit many labels into the same step budget have systematically shorter
    gaps), so the window stays where counts are essentially full."""
    need = max(2, -(-nwalks * 49 // 50))  # ceil(0.98 * nwalks)
    hi = int(np.searchsorted(-cnt, -need, side="right"))
    return (max(8, hi // 2), max(hi, 1))


def rms_ratio(ensemble, include_nested=False, window=None):
    """Per-index ratio sqrt(<r_n^2>) / sqrt(<theta_n^2>) across walks,
    with its fitted asymptote (correction exponent 1/4).

    Returns (ratio array indexed by n-1, SpiralFit)."""
    acc = _IndexedSums(2)
    nwalks = 0
    for ev in ensemble:
        e = _filtered(ev, include_nested)
        x = np.asarray(e["x"], dtype=float)
        y = np.asarray(e["y"], dtype=float)
        if x.size == 0:
            continue
        th = spiral_angles(x, y)
        acc.add(np.stack([x * x + y * y, th * th], axis=1))
        nwalks += 1
    means, cnt = acc.means()
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.sqrt(means[:, 0] / means[:, 1])
    fit = fit_asymptote(ratio, 0.25, window or _fit_window(cnt, nwalks))
    if nwalks < 2:
        fit.low_confidence = True
    return ratio, fit


def mean_ratio(ensemble, include_nested=False, bin_width=TWO_PI, window=None):
    """<r>/theta per theta window of one turn: labels are pooled across
    walks into theta bins, and each bin's mean radius is divided by its
    centre angle.  Returns (theta_centers, ratio, SpiralFit)."""
    sums = np.zeros(64)
    cnts = np.zeros(64, dtype=np.int64)
    nwalks = 0
    for ev in ensemble:
        e = _filtered(ev, include_nested)
        x = np.asarray(e["x"], dtype=float)
        y = np.asarray(e["y"], dtype=float)
        if x.size == 0:
            continue
        th = spiral_angles(x, y)
        r = np.hypot(x, y)
        keep = th > 0
        b = (th[keep] / bin_width).astype(np.int64)
        if b.size:
            top = int(b.max()) + 1
            if top > sums.size:
                size = sums.size
                while size < top:
                    size *= 2
                sums = np.concatenate([sums, np.zeros(size - sums.size)])
                cnts = np.concatenate(
                    [cnts, np.zeros(size - cnts.size, dtype=np.int64)])
            np.add.at(sums, b, r[keep])
            np.add.at(cnts, b, 1)
        nwalks += 1
    used = cnts > 0
    nbins = int(np.flatnonzero(used)[-1]) + 1 if used.any() else 0
    centers = (np.arange(nbins) + 0.5) * bin_width
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(cnts[:nbins] > 0, sums[:nbins] / cnts[:nbins], np.nan)
        ratio = ratio / centers
    fit = fit_asymptote(ratio, 0.25, window)
    if nwalks < 2:
        fit.low_confidence = True
    return centers, ratio, fit


def gap_stats(ensemble, include_nested=False, window=None):
    """Mean inter-label gap <t_in[n+1] - t_out[n]> per index n across
    walks, plus its fitted asymptote (correction exponent 1/2).

    Returns (gap array indexed by n-1, SpiralFit)."""
    acc = _IndexedSums(1)
    nwalks = 0
    for ev in ensemble:
        e = _filtered(ev, include_nested)
        t_in = np.asarray(e["t_in"], dtype=float)
        t_out = np.asarray(e["t_out"], dtype=float)
        if t_in.size >= 2:
            acc.add((t_in[1:] - t_out[:-1])[:, None])
        nwalks += 1
    means, cnt = acc.means()
    gaps = means[:, 0]
    fit = fit_asymptote(gaps, 0.5, window or _fit_window(cnt, nwalks))
    if nwalks < 2:
        fit.low_confidence = True
    return gaps, fit


@dataclass
class DensityProfile:
    bin_edges: np.ndarray   # [0,1) origin bin, then width-2 annuli
    rho: np.ndarray         # labels per lattice site per annulus
    peak: float             # density at the origin site, rho(0)
    plateau: float          # site-weighted mean over the flat window
    plateau_window: tuple
    falloff_max: float      # largest density beyond 2 * T**(1/3)
    walks: int


def _annulus_site_counts(edges):
    """Exact number of integer lattice points per distance annulus."""
    r = int(math.ceil(edges[-1]))
    xs = np.arange(-r, r + 1, dtype=np.int64)
    d = np.hypot(*np.meshgrid(xs, xs, indexing="ij")).ravel()
    counts, _ = np.histogram(d, bins=edges)
    return counts


def label_density(ensemble, steps, include_nested=False, bin_width=2.0,
                  r_max=None):
    """Radial label density: labels per lattice site, averaged over the
    ensemble.  The first bin [0, 1) is the origin site alone, so rho[0]
    is the density at r = 0; width-2 annuli follow.  ``steps`` is the
    common walk length T, fixing the plateau window [10, 0.6*T**(1/3)]
    and the falloff radius 2*T**(1/3)."""
    scale = float(steps) ** (1.0 / 3.0)
    if r_max is None:
        r_max = max(3.0 * scale, 24.0)
    edges = np.concatenate(([0.0], np.arange(1.0, r_max + bin_width,
                                             bin_width)))
    counts = np.zeros(edges.size - 1)
    nwalks = 0
    for ev in ensemble:
        e = _filtered(ev, include_nested)
        r = np.hypot(np.asarray(e["x"], dtype=float),
                     np.asarray(e["y"], dtype=float))
        h, _ = np.histogram(r, bins=edges)
        counts += h
        nwalks += 1
    if nwalks == 0:
        raise AnalysisError("empty ensemble")
    sites = _annulus_site_counts(edges)
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = counts / (nwalks * np.maximum(sites, 1))
    peak = float(rho[0])
    lo, hi = 10.0, 0.6 * scale
    mids = 0.5 * (edges[:-1] + edges[1:])
    sel = (edges[:-1] >= lo) & (edges[1:] <= hi)
    if not sel.any():
        sel = (mids >= lo / 2) & (mids <= hi)
    plateau = (float(np.average(rho[sel], weights=sites[sel]))
               if sel.any() else math.nan)
    tail = edges[:-1] >= 2.0 * scale
    falloff = float(rho[tail].max()) if tail.any() else 0.0
    return DensityProfile(edges, rho, peak, plateau, (lo, hi), falloff, nwalks)


@dataclass
class ExponentFit:
    nu: float               # half the log-log slope of <r^2> vs t
    window: tuple           # (t_lo, t_hi) actually used
    residual: float
    points: int


def mean_square_displacement(r2_per_walk):
    """Ensemble mean of r^2 across walks sharing one sample schedule."""
    stack = np.stack([np.asarray(r, dtype=float) for r in r2_per_walk])
    return stack.mean(axis=0)


def msd_exponent(sample_t, mean_r2, window_decades=1.5):
    """nu from the least-squares slope of log <r^2> against log t over
    the last ``window_decades`` decades of time."""
    t = np.asarray(sample_t, dtype=float)
    r2 = np.asarray(mean_r2, dtype=float)
    ok = (t > 0) & (r2 > 0) & np.isfinite(r2)
    if ok.sum() < 2:
        raise AnalysisError("too few usable samples for an exponent fit")
    t_hi = t[ok].max()
    t_lo = t_hi / 10.0 ** window_decades
    ok &= t >= t_lo
    if ok.sum() < 2:
        raise AnalysisError("fit window has fewer than 2 samples")
    lt, lr = np.log(t[ok]), np.log(r2[ok])
    basis = np.stack([np.ones(lt.size), lt], axis=1)
    coef, *_ = np.linalg.lstsq(basis, lr, rcond=None)
    rms = float(np.sqrt(np.mean((lr - basis @ coef) ** 2)))
    return ExponentFit(float(coef[1]) / 2.0, (float(t_lo), float(t_hi)),
                       rms, int(ok.sum()))


@dataclass
class LoopStat:
    """One full spiral turn: selected-label indices [i, j] with
    theta[j] >= theta[i] + 2*pi, its mean radius, duration between the
    two entry times, radial advance, and summed contour area."""

    i: int
    j: int
    radius: float
    dt: float
    dr: float
    area: float


def loop_partition(ev, include_nested=False):
    """Chop one walk's label sequence into consecutive spiral loops:
    each loop ends at the first later label a full turn ahead in angle."""
    e = _filtered(ev, include_nested)
    x = np.asarray(e["x"], dtype=float)
    y = np.asarray(e["y"], dtype=float)
    if x.size < 2:
        return []
    th = spiral_angles(x, y)
    r = np.hypot(x, y)
    t_in = np.asarray(e["t_in"], dtype=float)
    area = np.abs(np.asarray(e["area2"], dtype=float)) / 2.0
    loops = []
    i = 0
    while True:
        ahead = np.flatnonzero(th[i + 1:] >= th[i] + TWO_PI)
        if ahead.size == 0:
            break
        j = i + 1 + int(ahead[0])
        loops.append(LoopStat(i, j, float(r[i:j + 1].mean()),
                              float(t_in[j] - t_in[i]), float(r[j] - r[i]),
                              float(area[i:j + 1].sum())))
        i = j
    return loops


def loop_growth_slope(loops, r_min=5.0):
    """Least-squares slope of log dt against log radius over loops; the
    loop-closing law dt ~ R^2 makes it approach 2."""
    rr = np.array([lp.radius for lp in loops], dtype=float)
    dt = np.array([lp.dt for lp in loops], dtype=float)
    ok = (rr >= r_min) & (dt > 0)
    if ok.sum() < 3:
        raise AnalysisError("too few loops for a growth-law fit")
    lt, lr = np.log(dt[ok]), np.log(rr[ok])
    basis = np.stack([np.ones(lr.size), lr], axis=1)
    coef, *_ = np.linalg.lstsq(basis, lt, rcond=None)
    return float(coef[1]), int(ok.sum())


def pooled_loops(ensemble, include_nested=False):
    """loop_partition applied to every walk, concatenated."""
    out = []
    for ev in ensemble:
        out.extend(loop_partition(ev, include_nested))
    return out
