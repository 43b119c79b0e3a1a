import json
import os

import numpy as np
import pytest

from rotorwalk import cli
from rotorwalk import harness as H


def run_cli(*argv):
    return cli.main(list(argv))


def read_json(path):
    with open(path) as f:
        return json.load(f)


def test_split_seed_distinct_and_stable():
    seeds = [cli.split_seed(1, i) for i in range(1000)]
    assert len(set(seeds)) == 1000
    assert seeds[:3] == [cli.split_seed(1, i) for i in range(3)]


def test_simulate_writes_walks_and_manifest(tmp_path):
    out = str(tmp_path / "run")
    assert run_cli("simulate", "--steps", "20000", "--seed", "5",
                   "--ensemble", "2", "--out", out) == 0
    man = read_json(os.path.join(out, "manifest.json"))
    assert man["kind"] == "rotorwalk-run" and man["ensemble"] == 2
    assert man["walk_seeds"] == [cli.split_seed(5, 0), cli.split_seed(5, 1)]
    assert sorted(man["files"]) == ["walk0000.events.jsonl", "walk0000.samples.csv",
                                    "walk0001.events.jsonl", "walk0001.samples.csv"]
    for name, digest in man["files"].items():
        path = os.path.join(out, name)
        assert os.path.exists(path)
        assert cli.sha256_file(path) == digest


def test_simulate_rerun_reproduces_digests(tmp_path):
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    for out in (a, b):
        assert run_cli("simulate", "--steps", "30000", "--seed", "9",
                       "--ensemble", "2", "--out", out) == 0
    assert read_json(os.path.join(a, "manifest.json"))["files"] == \
        read_json(os.path.join(b, "manifest.json"))["files"]


def test_simulate_usage_errors(tmp_path):
    assert run_cli("simulate", "--seed", "1", "--out", str(tmp_path)) == 2
    assert run_cli("simulate", "--steps", "10", "--seed", "1",
                   "--out", str(tmp_path / "x"), "--ensemble", "0") == 2


def test_simulate_config_file_and_flag_precedence(tmp_path):
    cfgp = tmp_path / "run.cfg"
    out1, out2 = str(tmp_path / "o1"), str(tmp_path / "o2")
    cfgp.write_text("steps = 1000\nseed = 4  # master\nensemble = 1\n")
    assert run_cli("simulate", "--config", str(cfgp), "--out", out1) == 0
    assert read_json(os.path.join(out1, "manifest.json"))["steps"] == 1000
    assert run_cli("simulate", "--config", str(cfgp), "--steps", "500",
                   "--out", out2) == 0
    assert read_json(os.path.join(out2, "manifest.json"))["steps"] == 500
    bad = tmp_path / "bad.cfg"
    bad.write_text("steps\n")
    assert run_cli("simulate", "--config", str(bad), "--out", out1) == 2


def test_simulate_random_mode(tmp_path):
    out = str(tmp_path / "rnd")
    assert run_cli("simulate", "--steps", "20000", "--seed", "2",
                   "--mode", "random", "--ensemble", "2", "--out", out) == 0
    man = read_json(os.path.join(out, "manifest.json"))
    assert man["mode"] == "random"
    assert os.path.getsize(os.path.join(out, "walk0000.events.jsonl")) == 0


def test_simulate_checkpoint_and_resume_match_fresh_run(tmp_path):
    fresh, ck = str(tmp_path / "f"), str(tmp_path / "c")
    assert run_cli("simulate", "--steps", "20000", "--seed", "8",
                   "--out", fresh) == 0
    assert run_cli("simulate", "--steps", "20000", "--seed", "8",
                   "--out", ck, "--checkpoint-every", "7000") == 0
    assert os.path.exists(os.path.join(ck, "walk0000.ckpt"))
    # a --resume rerun picks the checkpoint up at its final step and must
    # reproduce identical outputs
    assert run_cli("simulate", "--steps", "20000", "--seed", "8",
                   "--out", ck, "--checkpoint-every", "7000", "--resume") == 0
    fm = read_json(os.path.join(fresh, "manifest.json"))["files"]
    cm = read_json(os.path.join(ck, "manifest.json"))["files"]
    assert fm == cm


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    out = str(tmp_path_factory.mktemp("ens") / "run")
    assert cli.main(["simulate", "--steps", "50000", "--seed", "5",
                     "--ensemble", "3", "--out", out]) == 0
    return out


def test_analyze_summary_and_tables(run_dir, tmp_path, capsys):
    report = str(tmp_path / "report.json")
    tables = str(tmp_path / "tables")
    assert run_cli("analyze", "--input", run_dir, "--report", report,
                   "--tables", tables) == 0
    printed = json.loads(capsys.readouterr().out)
    saved = read_json(report)
    assert printed == saved
    assert saved["walks"] == 3 and saved["steps"] == 50000
    for key in ("nu", "ratio_c", "gap_c", "rho_peak", "rho_plateau",
                "loop_slope"):
        assert isinstance(saved[key], float), key
    assert saved["label_events"] > 0
    for name in ("msd_vs_t.csv", "ratio_vs_n.csv", "gap_vs_n.csv",
                 "density_vs_r.csv"):
        table = np.loadtxt(os.path.join(tables, name), delimiter=",",
                           skiprows=1, ndmin=2)
        assert table.shape[0] > 5, name


def test_analyze_rejects_modified_inputs(run_dir, tmp_path, capsys):
    import shutil
    broken = str(tmp_path / "broken")
    shutil.copytree(run_dir, broken)
    with open(os.path.join(broken, "walk0000.events.jsonl"), "a") as f:
        f.write('{"k":999}\n')
    assert run_cli("analyze", "--input", broken) == 1
    assert "digest mismatch" in capsys.readouterr().err


def test_analyze_missing_inputs(tmp_path, capsys):
    assert run_cli("analyze", "--input", str(tmp_path)) == 1
    assert "manifest" in capsys.readouterr().err
    assert run_cli("analyze") == 2


def test_verify_single_suite(tmp_path, capsys):
    report = str(tmp_path / "verify.json")
    assert run_cli("verify", "--suite", "propA", "--trials", "5",
                   "--seed", "3", "--grid", "8x8", "--report", report) == 0
    assert "verify propA: 5 trials, 0 failures [ok]" in capsys.readouterr().out
    saved = read_json(report)
    assert saved["passed"] is True
    assert saved["results"][0]["suite"] == "propA"


def test_verify_usage_errors():
    assert run_cli("verify", "--suite", "bogus") == 2
    assert run_cli("verify", "--suite", "propA", "--grid", "8by8") == 2


def test_verify_failure_exits_nonzero(monkeypatch, capsys):
    def always_fail(seed, grid):
        return H.CheckReport("x", False, {"claim": False}, {})

    monkeypatch.setitem(H.SUITES, "propA", always_fail)
    assert run_cli("verify", "--suite", "propA", "--trials", "3",
                   "--seed", "1") == 1
    out = capsys.readouterr().out
    assert "3 failures [FAIL]" in out and "replay seeds" in out
