"""One test per acceptance criterion, each recording a PASS/FAIL line."""

from __future__ import annotations

import io
import json
import os
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import record_criterion
from edgeindex import cli, inequalities, suite
from edgeindex.config import SuiteConfig
from edgeindex.forms import circle_fiber_transgression
from edgeindex.index4d import EdgeData4D, SignatureData4D, adiabatic_eta_limit, dirac_index_4d, signature_4d
from edgeindex.model_operator import ModelParams
from edgeindex.projectors import calderon_from_greens_limit

CFG = SuiteConfig()


@pytest.fixture(scope="module")
def det_table():
    t0 = time.perf_counter()
    table = suite.det_sweep_table(CFG.det_mu.values(), CFG.det_z.values())
    return table, time.perf_counter() - t0


def _timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0


def test_criterion_01_wronskian():
    res, secs = _timed(suite.item_wronskian, CFG)
    ok = res["n_points"] == 200 * 200 and res["max_residual"] < 1e-10 and secs < 5.0
    record_criterion(1, "Wronskian suite", ok, f"max residual {res['max_residual']:.2e}, {secs:.2f}s")
    assert ok


def test_criterion_02_determinant_bound(det_table):
    table, sweep_secs = det_table
    res, secs = _timed(suite.item_det_bound, CFG, table=table)
    secs += sweep_secs
    ok = (
        np.asarray(table["det"]).size == 50 * 500
        and res["max_abs_det"] <= 1 - 1e-3
        and res["max_route_discrepancy"] <= 1e-10
        and abs(res["spot"]["det"] - 0.007713) <= 1e-5
        and secs < 30.0
    )
    record_criterion(
        2, "determinant bound",
        ok,
        f"max|det| {res['max_abs_det']:.4f}, route gap {res['max_route_discrepancy']:.1e}, "
        f"det(1/2,1) {res['spot']['det']:.7f}, {secs:.2f}s",
    )
    assert ok


def test_criterion_03_projector_algebra(det_table):
    res = suite.item_projector_algebra(CFG, table=det_table[0])
    ok = (
        res["calderon_idempotency"] <= 1e-9
        and res["calderon_trace_err"] <= 1e-10
        and res["aps_idempotency"] <= 1e-13
        and res["homotopy_points"] == 100
        and res["homotopy_start_gap"] == 0.0
        and res["homotopy_end_gap"] <= 1e-10
        and res["homotopy_idempotency"] <= 1e-8
    )
    record_criterion(
        3, "projector algebra and homotopy",
        ok,
        f"||N^2-N|| {res['calderon_idempotency']:.1e}, homotopy end gap {res['homotopy_end_gap']:.1e}",
    )
    assert ok


def test_criterion_04_greens_inverse():
    res, secs = _timed(suite.item_greens_inverse, CFG)
    cases = res["cases"]
    ok = (
        len(cases) == 3
        and all(c["residual_sup"] <= 1e-4 and c["convergence_order"] >= 1.0 for c in cases)
        and CFG.greens_grid[2] == 1e-3
        and tuple(CFG.greens_window) == (0.1, 5.0)
        and secs < 60.0
    )
    worst = max(c["residual_sup"] for c in cases)
    order = min(c["convergence_order"] for c in cases)
    record_criterion(4, "Green's operator right inverse", ok, f"residual {worst:.1e}, order {order:.2f}, {secs:.2f}s")
    assert ok


def test_criterion_05_calderon_limit():
    devs = []
    for mu, eta, f in [(1.5, 1.0, 1), (0.5, 2.0, 1), (5.0, 3.0, 2)]:
        rep = calderon_from_greens_limit(ModelParams(mu, eta, f), CFG.calderon_sigma)
        assert rep.sigma[-1] == 1 - 1e-6
        devs.append(rep.final_deviation)
    ok = max(devs) < 1e-4
    record_criterion(5, "Calderon limit of the Green's kernel", ok, f"max deviation {max(devs):.1e}")
    assert ok


def test_criterion_06_witt():
    res = suite.item_witt(CFG)
    ok = res["n_beta"] == 1000 and res["n_random_spectra"] == 1000 and res["passed"]
    record_criterion(6, "Witt gap and indicial roots", ok, f"mismatches {len(res['beta_mismatches'])}, leaks {res['root_leaks']}")
    assert ok


def test_criterion_07_transgression():
    exact = all(
        circle_fiber_transgression(beta, q) == -(beta**2) * q
        for beta in (Fraction(1, 3), Fraction(1, 2), Fraction(1))
        for q in range(-5, 6)
    )
    res = suite.item_transgression(CFG)
    ok = exact and res["passed"] and res["max_exact_numeric_gap"] <= 1e-12
    record_criterion(7, "transgression pipeline", ok, f"exact/numeric gap {res['max_exact_numeric_gap']:.1e}")
    assert ok


def test_criterion_08_index4d():
    smooth = all(dirac_index_4d(EdgeData4D(-48, q, 1)).value == 2 for q in range(-20, 21))
    eta = adiabatic_eta_limit(1)
    sig = signature_4d(SignatureData4D(0, 3, Fraction(1, 2)))
    res = suite.item_index4d(CFG)
    ok = smooth and eta == Fraction(1, 24) and sig == 0.75 and res["aps_random_inputs"] == 100 and res["aps_failures"] == 0
    record_criterion(8, "4D index, eta limit, signature", ok, f"eta {eta}, signature {sig}")
    assert ok


def test_criterion_09_inequalities(monkeypatch):
    res = suite.item_inequalities(CFG)
    holds = res["passed"] and all(c["holds"] for c in res["checks"])

    # a violation must name its grid point and exit with status 2
    real = inequalities.check_group

    def broken(name, quick=False):
        reps = real(name, quick)
        if name == "baricz":
            r = reps[0]
            reps[0] = inequalities.InequalityReport(r.name, False, -1.0, (2.0, 0.5), r.n_points)
        return reps

    monkeypatch.setattr(inequalities, "check_group", broken)
    out, err = io.StringIO(), io.StringIO()
    code = cli.main(["suite", "--quick", "--no-timing"], out, err)
    named = "baricz_i_log_derivative violated at (mu, z) = (2.0, 0.5)" in err.getvalue()
    ok = holds and code == 2 and named
    record_criterion(9, "inequality sweeps", ok, f"{len(res['checks'])} checks, violation exit {code}")
    assert ok


def _suite_stdout(workers):
    env = dict(os.environ, EDGEINDEX_WORKERS=str(workers))
    proc = subprocess.run(
        [sys.executable, "-m", "edgeindex", "suite", "--no-timing"], capture_output=True, env=env, check=False
    )
    assert proc.returncode == 0, proc.stderr.decode()
    return proc.stdout


def test_criterion_10_determinism():
    outputs = {w: _suite_stdout(w) for w in (1, 4, 8)}
    doc = json.loads(outputs[1])
    ok = doc["passed"] and outputs[1] == outputs[4] == outputs[8] and "timing" not in doc
    record_criterion(10, "suite determinism across 1, 4, 8 workers", ok, f"{len(outputs[1])} bytes")
    assert ok
