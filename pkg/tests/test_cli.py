import csv
import json
import math
import subprocess
import sys

import pytest

from jointmeas.cli import main
from jointmeas.experiment import build_reference_experiments, dump_config


def test_synth_json(capsys):
    assert main(["synth", "--p", "0.67", "--theta", "25", "--format", "json"]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["alpha"] == pytest.approx(0.6170261834019669, abs=1e-12)
    assert info["beta"] == pytest.approx(0.8572506570405194, abs=1e-12)
    assert 2 * info["theta_max_deg"] == pytest.approx(52.4439, abs=1e-4)
    assert info["relabeled"] is False


def test_synth_text(capsys):
    assert main(["synth", "--theta", "10"]) == 0
    out = capsys.readouterr().out
    assert "alpha" in out and "beta" in out


def test_synth_infeasible_exit_code(capsys):
    assert main(["synth", "--p", "0.67", "--theta", "40"]) == 2
    assert "error" in capsys.readouterr().err


def test_simulate_stdout(capsys):
    code = main(["simulate", "--thetas", "4", "13", "--shots", "2000", "--runs", "3", "--seed", "1"])
    assert code == 0
    rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
    assert [float(r["theta_deg"]) for r in rows] == [4.0, 13.0]
    assert all(math.isfinite(float(r["delta_product"])) for r in rows)


def test_simulate_flagged_exit_codes(tmp_path, capsys):
    out = tmp_path / "o.csv"
    args = ["simulate", "--thetas", "10", "40", "--shots", "1000", "--runs", "2", "--output", str(out)]
    assert main(args) == 1
    assert "flagged" in capsys.readouterr().err
    assert main(args + ["--allow-degenerate"]) == 0
    assert len(out.read_text().splitlines()) == 3


def test_simulate_from_config(tmp_path, capsys):
    cfg_path = tmp_path / "c.yaml"
    dump_config(build_reference_experiments()[0], cfg_path)
    out = tmp_path / "o.json"
    code = main(
        ["simulate", "--config", str(cfg_path), "--thetas", "7", "--shots", "1000", "--runs", "2",
         "--format", "json", "--output", str(out)]
    )
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["config"]["azimuth_phi"] == -160.7
    assert [r["theta_deg"] for r in doc["rows"]] == [7.0]


def test_simulate_io_error(tmp_path):
    bad = tmp_path / "nope" / "o.csv"
    assert main(["simulate", "--thetas", "4", "--shots", "100", "--runs", "1", "--output", str(bad)]) == 2


def test_reproduce_small(tmp_path, capsys):
    code = main(["reproduce", "--output", str(tmp_path), "--shots", "2000", "--runs", "2", "--sampler", "binomial"])
    assert code == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["experiment1.csv", "experiment2.csv", "experiment3.csv"]
    assert "points within 3 sigma" in capsys.readouterr().out


def test_validate_quick(capsys):
    assert main(["validate"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("[PASS]") >= 5


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "jointmeas", "synth", "--theta", "1", "--format", "json"],
        capture_output=True, text=True, check=True,
    )
    assert json.loads(res.stdout)["theta_deg"] == 1.0
