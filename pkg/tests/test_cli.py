from __future__ import annotations

import csv
import io
import json
import os
import subprocess
import sys

import pytest

from edgeindex import cli, inequalities
from edgeindex.config import SWEEP_CSV_COLUMNS, resolve_workers


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.main(argv, out, err)
    return code, out.getvalue(), err.getvalue()


def test_bessel_command():
    code, out, _ = run(["bessel", "--nu", "0.5", "--z", "1"])
    doc = json.loads(out)
    assert code == 0
    assert doc["schema_version"] == "1.0"
    assert doc["i"] == pytest.approx(0.9376748882454876, rel=1e-13)


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["nonsense"],
        ["bessel", "--nu", "-1", "--z", "1"],
        ["bessel", "--nu", "1"],
        ["bessel", "--nu", "abc", "--z", "1"],
        ["witt"],
        ["witt", "--beta", "1", "--spectrum", "x"],
        ["index4d", "--p1", "0", "--self-intersection", "1", "--beta", "2"],
        ["verify-greens", "--mu", "0.2", "--eta", "1", "--fdim", "1"],
        ["sweep-det", "--mu-min", "0.1"],
        ["--parallel-workers", "0", "suite", "--quick"],
    ],
)
def test_usage_errors_exit_one(argv):
    code, _, err = run(argv)
    assert code == 1
    assert err


def test_verify_greens_command():
    code, out, _ = run(["verify-greens", "--mu", "1.5", "--eta", "1", "--fdim", "1", "--grid-n", "8000"])
    doc = json.loads(out)
    assert code == 0 and doc["passed"]
    assert doc["chosen_sign_convention"] == "(b,-a)"


def test_verify_greens_failure_exits_two():
    # a grid too coarse to resolve the datum
    code, out, err = run(
        ["verify-greens", "--mu", "1.5", "--eta", "1", "--fdim", "1", "--grid-n", "60", "--spacing", "uniform",
         "--grid-min", "0.3", "--grid-max", "3"]
    )
    doc = json.loads(out)
    assert code == 2
    assert not doc["passed"] and doc["residual_sup"] > 1e-4
    assert "mu=1.5, eta=1.0, f=1" in err


def test_sweep_det_json_and_csv(tmp_path):
    args = ["sweep-det", "--mu-n", "3", "--z-n", "20"]
    code, out, _ = run(args)
    doc = json.loads(out)
    assert code == 0
    assert doc["max_abs_det"] < 1 - 1e-3
    assert doc["empirical_delta"] == pytest.approx(1 - doc["max_abs_det"])
    path = tmp_path / "sweep.csv"
    code, out, _ = run(args + ["--output", "csv", "--csv-path", str(path)])
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0
    assert tuple(rows[0]) == SWEEP_CSV_COLUMNS
    assert len(rows) == 1 + 3 * 20
    assert path.read_text() == out


def test_witt_commands(tmp_path):
    code, out, _ = run(["witt", "--beta", "1/2"])
    doc = json.loads(out)
    assert code == 0 and doc["holds"] and doc["margin"] == "1/2"
    spec = tmp_path / "spec.txt"
    spec.write_text("0.25\n-0.25\n")
    code, out, _ = run(["witt", "--spectrum", str(spec)])
    doc = json.loads(out)
    assert not doc["holds"] and not doc["witt_consequence"]


def test_transgression_and_index_commands():
    code, out, _ = run(["transgression", "--beta", "0.7", "--self-intersection", "3"])
    assert code == 0 and json.loads(out)["value"] == "-147/100"
    code, out, _ = run(["index4d", "--p1", "-48", "--self-intersection", "5", "--beta", "1"])
    doc = json.loads(out)
    assert doc["index"] == "2" and doc["integer"]


def test_suite_quick_passes():
    code, out, err = run(["suite", "--quick"])
    doc = json.loads(out)
    assert code == 0 and doc["passed"] and doc["failed"] == []
    assert "timing" in doc
    assert err.count("PASS") == len(doc["items"])


def test_suite_fault_injection_exits_two():
    code, out, err = run(["suite", "--quick", "--no-timing", "--inject-fault", "det_bound"])
    doc = json.loads(out)
    assert code == 2
    assert doc["failed"] == ["det_bound"]
    assert "failed item: det_bound" in err


def test_inequality_violation_names_point(monkeypatch):
    real = inequalities.check_group

    def broken(name, quick=False):
        reps = real(name, quick)
        if name == "amos":
            r = reps[0]
            reps[0] = inequalities.InequalityReport(r.name, False, -1e-3, (0.75, 2.5), r.n_points)
        return reps

    monkeypatch.setattr(inequalities, "check_group", broken)
    code, _, err = run(["suite", "--quick", "--no-timing"])
    assert code == 2
    assert "amos_lower_ratio violated at (mu, z) = (0.75, 2.5)" in err


def test_worker_env_overrides_flag(monkeypatch):
    assert resolve_workers(None) == 1
    assert resolve_workers(3) == 3
    monkeypatch.setenv("EDGEINDEX_WORKERS", "2")
    assert resolve_workers(5) == 2
    monkeypatch.setenv("EDGEINDEX_WORKERS", "x")
    with pytest.raises(ValueError):
        resolve_workers(1)


def _suite_subprocess(workers):
    env = dict(os.environ, EDGEINDEX_WORKERS=str(workers))
    proc = subprocess.run(
        [sys.executable, "-m", "edgeindex", "suite", "--quick", "--no-timing"],
        capture_output=True, env=env, check=False,
    )
    assert proc.returncode == 0, proc.stderr.decode()
    return proc.stdout


def test_quick_suite_deterministic_across_workers():
    outputs = {w: _suite_subprocess(w) for w in (1, 4)}
    assert outputs[1] == outputs[4]
