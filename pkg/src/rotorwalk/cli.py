"""Command-line interface: ``rotorwalk simulate | verify | analyze``.

Exit codes: 0 success, 1 runtime or assertion failure, 2 usage error.
Options resolve as flags > config file (flat key=value lines) > defaults.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__, analysis
from ._kernels import U64_MASK, mix64
from .harness import SUITES, run_suite
from .lattice import (DetectionCapError, WeakReversibilityError,
                      build_sample_schedule, read_events_jsonl,
                      read_samples_csv, run_random_walk_control, run_walk)

GOLDEN = 0x9E3779B97F4A7C15


class UsageError(Exception):
    pass


def split_seed(master, i):
    """Per-walk seed i derived from the master seed; distinct for
    0 <= i < 2**63 because mix64 is a bijection of distinct inputs."""
    return mix64((int(master) + (i + 1) * GOLDEN) & U64_MASK)


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def load_config(path):
    cfg = {}
    try:
        with open(path) as f:
            for ln, raw in enumerate(f, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise UsageError(f"{path}:{ln}: expected key=value")
                key, val = line.split("=", 1)
                cfg[key.strip()] = val.strip()
    except OSError as e:
        raise UsageError(f"cannot read config: {e}")
    return cfg


def _opt(args, cfg, key, default, cast=str):
    """Flag beats config beats default."""
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    if key in cfg:
        try:
            return cast(cfg[key])
        except ValueError:
            raise UsageError(f"config value {key}={cfg[key]!r} is not {cast.__name__}")
    return default


def _bool(text):
    if str(text).lower() in ("1", "true", "yes", "on"):
        return True
    if str(text).lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError("boolean")


# -- simulate ------------------------------------------------------------------


def _simulate_one(spec):
    """One walk worker: runs and writes its two files, returns their
    digests (picklable for process pools)."""
    (index, mode, wseed, steps, outdir, base, checkpoint_every, resume) = spec
    sched = build_sample_schedule(steps, base)
    stem = f"walk{index:04d}"
    ev_path = os.path.join(outdir, stem + ".events.jsonl")
    sa_path = os.path.join(outdir, stem + ".samples.csv")
    ck_path = os.path.join(outdir, stem + ".ckpt")
    if mode == "random":
        trace = run_random_walk_control(wseed, steps, sched)
    else:
        resume_from = ck_path if (resume and os.path.exists(ck_path)) else None
        trace = run_walk(wseed, steps, sched,
                         checkpoint_every=checkpoint_every,
                         checkpoint_path=ck_path if checkpoint_every else None,
                         resume_from=resume_from)
    trace.write_events_jsonl(ev_path)
    trace.write_samples_csv(sa_path)
    files = {os.path.basename(ev_path): sha256_file(ev_path),
             os.path.basename(sa_path): sha256_file(sa_path)}
    return index, files, trace.n_labels


def cmd_simulate(args, cfg):
    steps = _opt(args, cfg, "steps", None, int)
    seed = _opt(args, cfg, "seed", None, int)
    ensemble = _opt(args, cfg, "ensemble", 1, int)
    mode = _opt(args, cfg, "mode", "rotor")
    out = _opt(args, cfg, "out", None)
    checkpoint_every = _opt(args, cfg, "checkpoint_every", 0, int)
    threads = _opt(args, cfg, "threads", 1, int)
    base = _opt(args, cfg, "sample_base", 1.05, float)
    resume = bool(getattr(args, "resume", False) or _bool(cfg.get("resume", "0")))
    if steps is None or seed is None or out is None:
        raise UsageError("simulate needs --steps, --seed and --out")
    if mode not in ("rotor", "random"):
        raise UsageError(f"unknown mode {mode!r} (rotor or random)")
    if ensemble < 1 or steps < 0 or threads < 1:
        raise UsageError("ensemble and threads must be >= 1, steps >= 0")

    os.makedirs(out, exist_ok=True)
    started = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    t0 = time.perf_counter()
    specs = [(i, mode, split_seed(seed, i), steps, out, base,
              checkpoint_every or None, resume) for i in range(ensemble)]
    files = {}
    if threads > 1 and ensemble > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_simulate_one, specs))
    else:
        results = []
        for spec in specs:
            results.append(_simulate_one(spec))
            done = len(results)
            if done % 10 == 0 or done == ensemble:
                rate = (time.perf_counter() - t0) / done
                print(f"simulate: {done}/{ensemble} walks "
                      f"({rate:.2f} s/walk)", flush=True)
    labels_total = 0
    for _idx, fdig, nlab in results:
        files.update(fdig)
        labels_total += nlab
    manifest = {
        "kind": "rotorwalk-run",
        "version": 1,
        "package_version": __version__,
        "command": " ".join(sys.argv),
        "config": dict(cfg),
        "mode": mode,
        "steps": steps,
        "ensemble": ensemble,
        "master_seed": int(seed),
        "walk_seeds": [int(split_seed(seed, i)) for i in range(ensemble)],
        "sample_base": base,
        "started": started,
        "finished": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "files": dict(sorted(files.items())),
    }
    with open(os.path.join(out, "manifest.json"), "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"simulate: wrote {len(files)} files and manifest.json to {out} "
          f"({labels_total} label events)")
    return 0


# -- verify ---------------------------------------------------------------------


def cmd_verify(args, cfg):
    name = _opt(args, cfg, "suite", "all")
    trials = _opt(args, cfg, "trials", 100, int)
    seed = _opt(args, cfg, "seed", 1, int)
    grid_text = _opt(args, cfg, "grid", "14x14")
    report_path = _opt(args, cfg, "report", None)
    try:
        gw, gh = (int(p) for p in grid_text.lower().split("x"))
    except ValueError:
        raise UsageError(f"bad grid {grid_text!r}, expected WxH")
    if name != "all" and name not in SUITES:
        raise UsageError(f"unknown suite {name!r}; choose from "
                         f"{', '.join(sorted(SUITES))} or all")
    names = sorted(SUITES) if name == "all" else [name]
    results = []
    ok = True
    for sname in names:
        res = run_suite(sname, trials, seed, grid=(gw, gh))
        results.append(res.to_json())
        status = "ok" if res.failures == 0 else "FAIL"
        print(f"verify {sname}: {res.trials} trials, {res.failures} failures "
              f"[{status}] ({res.elapsed:.2f}s)")
        if res.failures:
            ok = False
            print(f"  first failure: {res.first_failure}")
            print(f"  replay seeds: {res.seeds[:5]}")
    if report_path:
        with open(report_path, "w") as f:
            json.dump({"passed": ok, "trials": trials, "seed": seed,
                       "grid": [gw, gh], "results": results}, f, indent=2)
            f.write("\n")
    return 0 if ok else 1


# -- analyze ---------------------------------------------------------------------


def _check_digests(indir, manifest):
    bad = []
    for name, digest in manifest.get("files", {}).items():
        path = os.path.join(indir, name)
        if not os.path.exists(path):
            bad.append(f"{name}: missing")
        elif sha256_file(path) != digest:
            bad.append(f"{name}: digest mismatch")
    return bad


def _write_csv(path, header, rows):
    with open(path, "w") as f:
        f.write(header + "\n")
        for row in rows:
            f.write(",".join(str(v) for v in row) + "\n")


def cmd_analyze(args, cfg):
    indir = _opt(args, cfg, "input", None)
    report_path = _opt(args, cfg, "report", None)
    tables_dir = _opt(args, cfg, "tables", None)
    if indir is None:
        raise UsageError("analyze needs --input")
    man_path = os.path.join(indir, "manifest.json")
    if not os.path.exists(man_path):
        print(f"analyze: no manifest.json in {indir}", file=sys.stderr)
        return 1
    with open(man_path) as f:
        manifest = json.load(f)
    bad = _check_digests(indir, manifest)
    if bad:
        for b in bad:
            print(f"analyze: {b}", file=sys.stderr)
        return 1

    steps = int(manifest["steps"])
    names = sorted(manifest.get("files", {}))
    ev_files = [n for n in names if n.endswith(".events.jsonl")]
    sa_files = [n for n in names if n.endswith(".samples.csv")]
    ensemble = [read_events_jsonl(os.path.join(indir, n)) for n in ev_files]
    r2_per_walk = []
    sample_t = None
    for n in sa_files:
        t, x, y = read_samples_csv(os.path.join(indir, n))
        if sample_t is None:
            sample_t = t
        r2_per_walk.append(x.astype(np.float64) ** 2 + y.astype(np.float64) ** 2)

    summary = {
        "mode": manifest.get("mode", "rotor"),
        "walks": len(sa_files),
        "steps": steps,
        "nu": None, "ratio_c": None, "gap_c": None,
        "rho_peak": None, "rho_plateau": None, "loop_slope": None,
    }
    tables = {}
    if r2_per_walk:
        mean_r2 = analysis.mean_square_displacement(r2_per_walk)
        fit = analysis.msd_exponent(sample_t, mean_r2)
        summary["nu"] = fit.nu
        summary["nu_fit"] = {"window": list(fit.window),
                             "residual": fit.residual, "points": fit.points}
        tables["msd_vs_t.csv"] = ("t,mean_r2",
                                  [(int(tt), float(rr))
                                   for tt, rr in zip(sample_t, mean_r2)])
    total_labels = int(sum(e["k"].shape[0] for e in ensemble))
    summary["label_events"] = total_labels
    if total_labels:
        ratio, rfit = analysis.rms_ratio(ensemble)
        gaps, gfit = analysis.gap_stats(ensemble)
        dens = analysis.label_density(ensemble, steps)
        loops = analysis.pooled_loops(ensemble)
        summary["ratio_c"] = rfit.b_est
        summary["ratio_fit"] = {"window": list(rfit.window),
                                "residual": rfit.residual,
                                "low_confidence": rfit.low_confidence}
        summary["gap_c"] = gfit.b_est
        summary["gap_fit"] = {"window": list(gfit.window),
                              "residual": gfit.residual,
                              "low_confidence": gfit.low_confidence}
        summary["rho_peak"] = dens.peak
        summary["rho_plateau"] = dens.plateau
        summary["rho_falloff_max"] = dens.falloff_max
        try:
            slope, nloops = analysis.loop_growth_slope(loops)
            summary["loop_slope"] = slope
            summary["loops_used"] = nloops
        except analysis.AnalysisError as e:
            summary["loop_slope_error"] = str(e)
        tables["ratio_vs_n.csv"] = ("n,rms_ratio", [
            (i + 1, float(v)) for i, v in enumerate(ratio) if math.isfinite(v)])
        tables["gap_vs_n.csv"] = ("n,mean_gap", [
            (i + 1, float(v)) for i, v in enumerate(gaps) if math.isfinite(v)])
        tables["density_vs_r.csv"] = ("r_lo,r_hi,rho", [
            (float(dens.bin_edges[i]), float(dens.bin_edges[i + 1]),
             float(dens.rho[i])) for i in range(dens.rho.size)])

    if tables_dir:
        os.makedirs(tables_dir, exist_ok=True)
        for name, (header, rows) in tables.items():
            _write_csv(os.path.join(tables_dir, name), header, rows)
    text = json.dumps(summary, indent=2, sort_keys=True)
    if report_path:
        with open(report_path, "w") as f:
            f.write(text + "\n")
    print(text)
    return 0


# -- entry point -------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(
        prog="rotorwalk",
        description="Rotor-router walk simulator and verification toolkit")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("simulate", help="run walk ensembles")
    ps.add_argument("--config")
    ps.add_argument("--steps", type=int)
    ps.add_argument("--seed", type=int)
    ps.add_argument("--ensemble", type=int)
    ps.add_argument("--mode", choices=("rotor", "random"))
    ps.add_argument("--out")
    ps.add_argument("--checkpoint-every", dest="checkpoint_every", type=int)
    ps.add_argument("--threads", type=int)
    ps.add_argument("--sample-base", dest="sample_base", type=float)
    ps.add_argument("--resume", action="store_true", default=False)

    pv = sub.add_parser("verify", help="run theorem suites")
    pv.add_argument("--config")
    pv.add_argument("--suite")
    pv.add_argument("--trials", type=int)
    pv.add_argument("--seed", type=int)
    pv.add_argument("--grid")
    pv.add_argument("--report")

    pa = sub.add_parser("analyze", help="reduce a run directory to statistics")
    pa.add_argument("--config")
    pa.add_argument("--input")
    pa.add_argument("--report")
    pa.add_argument("--tables")
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config) if getattr(args, "config", None) else {}
        if args.command == "simulate":
            return cmd_simulate(args, cfg)
        if args.command == "verify":
            return cmd_verify(args, cfg)
        return cmd_analyze(args, cfg)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (WeakReversibilityError, DetectionCapError) as e:
        print(f"runtime failure: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"io error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
