"""The acceptance battery behind ``edgeindex suite``.

Each item is a pure function of the configuration returning a JSON-ready
payload with a ``passed`` flag. Grid work is split into fixed units (one
``mu`` row, one parameter triple, one inequality group) whose results are
reassembled in grid order, so the payload does not depend on the worker
count. Wall-clock timings are returned separately.
"""

from __future__ import annotations

import random
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import numpy as np

from edgeindex import bessel, inequalities
from edgeindex.config import BUDGETS_S, SCHEMA_VERSION, SuiteConfig
from edgeindex.forms import circle_fiber_transgression, circle_transgression_numeric
from edgeindex.index4d import (
    EdgeData4D,
    SignatureData4D,
    adiabatic_eta_limit,
    aps_consistency_check,
    dirac_index_4d,
    signature_4d,
)
from edgeindex.model_operator import ModelParams, RadialGrid, Vector2Field, gaussian_rhs, verify_right_inverse
from edgeindex.projectors import (
    aps_symbol,
    calderon_from_greens_limit,
    calderon_symbol,
    det_sweep_row,
    difference_determinant,
    projector_homotopy,
    spectral_norm,
    stack_rows,
    summarize_sweep,
)
from edgeindex.witt import FiberSpectrum, circle_spectrum, indicial_roots, witt_gap_check

HALF = Fraction(1, 2)


def parallel_map(fn, items, workers: int = 1) -> list:
    """``[fn(x) for x in items]`` in input order, optionally across processes."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def det_sweep_table(mu_grid, z_grid, workers: int = 1) -> dict:
    z = np.asarray(z_grid, dtype=float)
    rows = parallel_map(_det_row_unit, [(float(m), z) for m in mu_grid], workers)
    return stack_rows(rows)


def _det_row_unit(args):
    mu, z = args
    return det_sweep_row(mu, z)


def item_wronskian(cfg: SuiteConfig, workers: int = 1) -> dict:
    nu = cfg.wronskian_nu.values()
    z = cfg.wronskian_z.values()
    res = bessel.wronskian_residual(nu[:, None], z[None, :])
    i = int(np.argmax(res))
    a, b = np.unravel_index(i, res.shape)
    worst = float(res.ravel()[i])
    return {
        "max_residual": worst,
        "worst_at": [float(nu[a]), float(z[b])],
        "n_points": int(res.size),
        "tol": cfg.wronskian_tol,
        "passed": worst < cfg.wronskian_tol,
    }


def item_det_bound(cfg: SuiteConfig, workers: int = 1, table=None) -> dict:
    table = det_sweep_table(cfg.det_mu.values(), cfg.det_z.values(), workers) if table is None else table
    report = summarize_sweep(table, cfg.det_margin)
    mu, z, expected, tol = cfg.det_spot
    spot = difference_determinant(mu, z)
    spot_ok = abs(spot.value - expected) <= tol
    out = report.to_dict()
    out.update(
        {
            "spot": {"mu": mu, "z": z, "det": spot.value, "expected": expected, "tol": tol, "ok": spot_ok},
            "passed": report.passed and report.max_route_discrepancy <= cfg.det_route_tol and spot_ok,
        }
    )
    return out


def _homotopy_unit(args):
    mu, z, times = args
    p = calderon_symbol(mu, z)
    q = aps_symbol(mu, z)
    endpoint0 = endpoint1 = idem = 0.0
    for t in times:
        f = projector_homotopy(p, q, t)
        idem = max(idem, f.idempotency_defect())
        if t == 0.0:
            endpoint0 = float(np.max(np.abs(f.entries - p.entries)))
        if t == 1.0:
            endpoint1 = spectral_norm(f.entries - q.entries)
    return endpoint0, endpoint1, idem


def item_projector_algebra(cfg: SuiteConfig, workers: int = 1, table=None) -> dict:
    table = det_sweep_table(cfg.det_mu.values(), cfg.det_z.values(), workers) if table is None else table
    n_idem = float(np.max(table["calderon_idempotency"]))
    n_trace = float(np.max(table["calderon_trace_err"]))
    aps_idem = float(np.max(table["aps_idempotency"]))
    units = [(float(m), float(z), cfg.homotopy_times) for m in cfg.homotopy_mu.values() for z in cfg.homotopy_z.values()]
    res = parallel_map(_homotopy_unit, units, workers)
    e0 = max(r[0] for r in res)
    e1 = max(r[1] for r in res)
    idem = max(r[2] for r in res)
    passed = (
        n_idem <= cfg.calderon_idempotency_tol
        and n_trace <= cfg.calderon_trace_tol
        and aps_idem <= cfg.aps_idempotency_tol
        and e0 == 0.0
        and e1 <= cfg.homotopy_endpoint_tol
        and idem <= cfg.homotopy_idempotency_tol
    )
    return {
        "calderon_idempotency": n_idem,
        "calderon_trace_err": n_trace,
        "aps_idempotency": aps_idem,
        "homotopy_points": len(units),
        "homotopy_start_gap": e0,
        "homotopy_end_gap": e1,
        "homotopy_idempotency": idem,
        "passed": passed,
    }


def _greens_unit(args):
    (mu, eta, f), (start, stop, step), window, tol = args
    params = ModelParams(mu, eta, f)
    grid = RadialGrid.with_step(start, stop, step)
    rhs = Vector2Field.sample(gaussian_rhs(), grid)
    report = verify_right_inverse(params, rhs, grid, window=window, tol=tol, raise_on_failure=False)
    out = report.to_dict()
    out["params"] = [mu, eta, f]
    return out


def item_greens_inverse(cfg: SuiteConfig, workers: int = 1) -> dict:
    units = [(t, cfg.greens_grid, cfg.greens_window, cfg.greens_tol) for t in cfg.greens_triples]
    reports = parallel_map(_greens_unit, units, workers)
    return {"cases": reports, "passed": all(r["passed"] for r in reports)}


def item_calderon_limit(cfg: SuiteConfig, workers: int = 1) -> dict:
    cases = []
    for mu, eta, f in cfg.greens_triples:
        rep = calderon_from_greens_limit(ModelParams(mu, eta, f), cfg.calderon_sigma)
        d = rep.to_dict()
        d["params"] = [mu, eta, f]
        cases.append(d)
    return {
        "cases": cases,
        "tol": cfg.calderon_tol,
        "passed": all(c["final_deviation"] < cfg.calderon_tol for c in cases),
    }


def random_witt_spectrum(rng: random.Random) -> FiberSpectrum:
    """Symmetric spectrum with every ``|lambda| >= 1/2`` (boundary values included)."""
    vals = []
    for _ in range(rng.randint(1, 8)):
        lam = HALF if rng.random() < 0.1 else HALF + Fraction(rng.randint(0, 2000), rng.randint(1, 200))
        vals += [lam, -lam]
    return FiberSpectrum.finite(vals)


def item_witt(cfg: SuiteConfig, workers: int = 1) -> dict:
    mismatches = []
    for k in range(1, cfg.witt_n_beta + 1):
        beta = Fraction(4 * k, cfg.witt_n_beta)
        res = witt_gap_check(circle_spectrum(beta, "nontrivial", 3))
        if res.holds != (beta <= 1) or res.margin != 1 / (2 * beta) - HALF:
            mismatches.append(str(beta))
    rng = random.Random(cfg.seed)
    leaks = 0
    for _ in range(cfg.witt_n_random):
        roots = indicial_roots(random_witt_spectrum(rng))
        if any(0 < r < 1 for r in roots.roots) or not roots.witt_consequence:
            leaks += 1
    return {
        "n_beta": cfg.witt_n_beta,
        "beta_mismatches": mismatches[:10],
        "n_random_spectra": cfg.witt_n_random,
        "root_leaks": leaks,
        "passed": not mismatches and leaks == 0,
    }


def item_transgression(cfg: SuiteConfig, workers: int = 1) -> dict:
    wrong = []
    for beta in cfg.transgression_betas:
        for q in cfg.transgression_q:
            if circle_fiber_transgression(beta, q) != -(beta**2) * q:
                wrong.append([str(beta), q])
    gap = 0.0
    betas = sorted(set(cfg.transgression_numeric_betas) | set(cfg.transgression_betas))
    for beta in betas:
        for q in cfg.transgression_q:
            exact = circle_fiber_transgression(beta, q)
            numeric = circle_transgression_numeric(float(beta), q)
            gap = max(gap, abs(numeric - float(exact)))
    return {
        "exact_failures": wrong,
        "max_exact_numeric_gap": gap,
        "n_numeric_betas": len(betas),
        "tol": cfg.transgression_tol,
        "passed": not wrong and gap <= cfg.transgression_tol,
    }


def random_edge_data(rng: random.Random) -> EdgeData4D:
    den = rng.randint(1, 30)
    return EdgeData4D(
        Fraction(rng.randint(-500, 500), rng.randint(1, 12)),
        rng.randint(-30, 30),
        Fraction(rng.randint(1, den), den),
    )


def item_index4d(cfg: SuiteConfig, workers: int = 1) -> dict:
    smooth = all(dirac_index_4d(EdgeData4D(-48, q, 1)).value == 2 for q in range(-10, 11))
    eta = adiabatic_eta_limit(1)
    sig = signature_4d(SignatureData4D(0.0, 3, Fraction(1, 2)))
    rng = random.Random(cfg.seed + 1)
    failures = 0
    for _ in range(cfg.index_random):
        try:
            aps_consistency_check(random_edge_data(rng))
        except Exception:
            failures += 1
    return {
        "index_smooth_case": smooth,
        "eta_limit_q1": str(eta),
        "signature_example": sig,
        "aps_random_inputs": cfg.index_random,
        "aps_failures": failures,
        "passed": smooth and eta == Fraction(1, 24) and sig == 0.75 and failures == 0,
    }


def _inequality_unit(args):
    quick, group = args
    return [r.to_dict() for r in inequalities.check_group(group, quick)]


def item_inequalities(cfg: SuiteConfig, workers: int = 1) -> dict:
    groups = parallel_map(_inequality_unit, [(cfg.quick, g) for g in inequalities.CHECK_GROUPS], workers)
    checks = [c for g in groups for c in g]
    violations = [
        {"name": c["name"], "at": c["worst_at"], "residual": c["worst_residual"]} for c in checks if not c["holds"]
    ]
    return {"checks": checks, "violations": violations, "passed": not violations}


ITEMS = (
    ("wronskian", item_wronskian),
    ("det_bound", item_det_bound),
    ("projector_algebra", item_projector_algebra),
    ("greens_inverse", item_greens_inverse),
    ("calderon_limit", item_calderon_limit),
    ("witt", item_witt),
    ("transgression", item_transgression),
    ("index4d", item_index4d),
    ("inequalities", item_inequalities),
)

ITEM_NAMES = tuple(name for name, _ in ITEMS)


def run_suite(cfg: SuiteConfig, workers: int = 1, inject_fault=None):
    """Run every battery item; return ``(payload, timing)``.

    ``inject_fault`` names an item whose result is forced to fail, to exercise
    the failure path of the harness.
    """
    if inject_fault is not None and inject_fault not in ITEM_NAMES:
        raise ValueError(f"unknown suite item {inject_fault!r}")
    results = []
    timing = {}
    table = None
    start_all = time.perf_counter()
    for name, fn in ITEMS:
        t0 = time.perf_counter()
        if name in ("det_bound", "projector_algebra"):
            if table is None:
                table = det_sweep_table(cfg.det_mu.values(), cfg.det_z.values(), workers)
            payload = fn(cfg, workers, table=table)
        else:
            payload = fn(cfg, workers)
        if name == inject_fault:
            payload = dict(payload, passed=False, injected_fault=True)
        timing[name] = time.perf_counter() - t0
        results.append({"name": name, "passed": bool(payload["passed"]), "details": payload})
    timing["total"] = time.perf_counter() - start_all
    timing["budgets_s"] = dict(BUDGETS_S)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "quick": cfg.quick,
        "items": results,
        "failed": [r["name"] for r in results if not r["passed"]],
        "passed": all(r["passed"] for r in results),
    }
    return payload, timing
