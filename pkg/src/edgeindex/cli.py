"""Command-line entry point.

Exit codes: 0 when every check passes, 2 when a mathematical invariant is
violated, 1 for usage errors. Reports go to standard output as JSON (or CSV
for ``sweep-det --output csv``); diagnostics go to standard error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

import numpy as np

from edgeindex import bessel
from edgeindex.bessel import BesselPoint
from edgeindex.config import (
    SCHEMA_VERSION,
    SWEEP_CSV_COLUMNS,
    VERIFY_GREENS_DEFAULTS,
    SuiteConfig,
    quick_config,
    resolve_workers,
)
from edgeindex.errors import EdgeIndexError, NoConventionConverges
from edgeindex.index4d import EdgeData4D, adiabatic_eta_limit, dirac_index_4d, signature_correction
from edgeindex.model_operator import ModelParams, RadialGrid, Vector2Field, gaussian_rhs, verify_right_inverse
from edgeindex.projectors import summarize_sweep
from edgeindex.suite import ITEM_NAMES, det_sweep_table, run_suite
from edgeindex.witt import Spin, circle_spectrum, indicial_roots, read_spectrum_file, witt_gap_check
from edgeindex.forms import circle_fiber_transgression

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VIOLATION = 2


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors as exit code 1."""

    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")


def _positive_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def _finite(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not math.isfinite(x):
        raise argparse.ArgumentTypeError("must be finite")
    return x


def _emit(payload: dict, out) -> None:
    doc = {"schema_version": SCHEMA_VERSION}
    doc.update(payload)
    out.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def build_parser() -> Parser:
    parser = Parser(prog="edgeindex", description="Verification pipelines for edge Dirac index computations.")
    parser.add_argument(
        "--parallel-workers", type=_positive_int, default=None, metavar="N",
        help="worker processes for grid sweeps (EDGEINDEX_WORKERS overrides)",
    )
    sub = parser.add_subparsers(dest="command", parser_class=Parser)

    p = sub.add_parser("bessel", help="evaluate I_nu(z), K_nu(z)")
    p.add_argument("--nu", type=_finite, required=True)
    p.add_argument("--z", type=_finite, required=True)

    p = sub.add_parser("verify-greens", help="check that the Green's operator inverts the model operator")
    p.add_argument("--mu", type=_finite, required=True)
    p.add_argument("--eta", type=_finite, required=True)
    p.add_argument("--fdim", type=_positive_int, required=True)
    p.add_argument("--grid-min", type=_finite, default=VERIFY_GREENS_DEFAULTS["grid_min"])
    p.add_argument("--grid-max", type=_finite, default=VERIFY_GREENS_DEFAULTS["grid_max"])
    p.add_argument("--grid-n", type=_positive_int, default=VERIFY_GREENS_DEFAULTS["grid_n"])
    p.add_argument("--spacing", choices=("geometric", "uniform"), default=VERIFY_GREENS_DEFAULTS["spacing"])

    p = sub.add_parser("sweep-det", help="bound det(N - N_APS) over a (mu, z) grid")
    cfg = SuiteConfig()
    p.add_argument("--mu-min", type=_finite, default=cfg.det_mu.start)
    p.add_argument("--mu-max", type=_finite, default=cfg.det_mu.stop)
    p.add_argument("--mu-n", type=_positive_int, default=cfg.det_mu.n)
    p.add_argument("--z-min", type=_finite, default=cfg.det_z.start)
    p.add_argument("--z-max", type=_finite, default=cfg.det_z.stop)
    p.add_argument("--z-n", type=_positive_int, default=cfg.det_z.n)
    p.add_argument("--output", choices=("json", "csv"), default="json")
    p.add_argument("--csv-path", default=None, help="also write the per-point CSV here")
    p.add_argument("--parallel-workers", type=_positive_int, default=None, dest="sub_workers", metavar="N")

    p = sub.add_parser("witt", help="spectral gap and indicial roots of a fiber spectrum")
    p.add_argument("--beta", type=_rational)
    p.add_argument("--spin", choices=[s.value for s in Spin], default=Spin.NONTRIVIAL.value)
    p.add_argument("--cutoff", type=_rational, default=Fraction(3))
    p.add_argument("--spectrum", help="file with one eigenvalue per line")

    p = sub.add_parser("transgression", help="integrated p1 transgression over a circle bundle")
    p.add_argument("--beta", type=_rational, required=True)
    p.add_argument("--self-intersection", type=int, required=True)

    p = sub.add_parser("index4d", help="4D Dirac index with a cone edge")
    p.add_argument("--p1", type=_rational, required=True)
    p.add_argument("--self-intersection", type=int, required=True)
    p.add_argument("--beta", type=_rational, required=True)

    p = sub.add_parser("suite", help="run the full acceptance battery")
    p.add_argument("--quick", action="store_true", help="reduced grids")
    p.add_argument("--no-timing", action="store_true", help="omit the timing field")
    p.add_argument("--parallel-workers", type=_positive_int, default=None, dest="sub_workers", metavar="N")
    p.add_argument("--inject-fault", choices=ITEM_NAMES, default=None, help=argparse.SUPPRESS)
    return parser


def _workers(args) -> int:
    flag = getattr(args, "sub_workers", None) or args.parallel_workers
    try:
        return resolve_workers(flag)
    except ValueError as exc:
        raise UsageError(str(exc))


def cmd_bessel(args, out, err) -> int:
    pair = bessel.bessel_pair(BesselPoint(args.nu, args.z))
    _emit(
        {
            "nu": args.nu,
            "z": args.z,
            "i": pair.i_val,
            "k": pair.k_val,
            "scaled": pair.scaled,
            "est_rel_err": pair.est_rel_err,
            "wronskian_residual": float(bessel.wronskian_residual(args.nu, args.z)),
        },
        out,
    )
    return EXIT_OK


def cmd_verify_greens(args, out, err) -> int:
    params = ModelParams(args.mu, args.eta, args.fdim)
    if args.grid_n < 2 or args.grid_min <= 0 or args.grid_max <= args.grid_min:
        raise UsageError("grid needs 0 < grid-min < grid-max and grid-n >= 2")
    if args.spacing == "geometric":
        grid = RadialGrid.geometric(args.grid_min, args.grid_max, args.grid_n)
    else:
        grid = RadialGrid.uniform(args.grid_min, args.grid_max, args.grid_n)
    rhs = Vector2Field.sample(gaussian_rhs(), grid)
    report = verify_right_inverse(params, rhs, grid, raise_on_failure=False)
    payload = report.to_dict()
    payload["params"] = {"mu": args.mu, "eta": args.eta, "fdim": args.fdim}
    payload["grid"] = {"min": args.grid_min, "max": args.grid_max, "n": args.grid_n, "spacing": args.spacing}
    _emit(payload, out)
    if not report.passed:
        err.write(
            f"right-inverse check failed at mu={args.mu}, eta={args.eta}, f={args.fdim}: "
            f"residual {report.residual_sup:.3e}, order {report.convergence_order:.2f}\n"
        )
        return EXIT_VIOLATION
    return EXIT_OK


def _sweep_csv(table: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_CSV_COLUMNS)
    cols = [table[c] for c in SWEEP_CSV_COLUMNS]
    for row in zip(*cols):
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def cmd_sweep_det(args, out, err) -> int:
    if args.mu_min < 0.5 or args.mu_max < args.mu_min or args.z_min <= 0 or args.z_max < args.z_min:
        raise UsageError("sweep-det needs 1/2 <= mu-min <= mu-max and 0 < z-min <= z-max")
    mu = np.linspace(args.mu_min, args.mu_max, args.mu_n)
    z = np.geomspace(args.z_min, args.z_max, args.z_n)
    table = det_sweep_table(mu, z, _workers(args))
    report = summarize_sweep(table)
    csv_text = _sweep_csv(table)
    if args.csv_path:
        with open(args.csv_path, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
    if args.output == "csv":
        out.write(csv_text)
    else:
        payload = report.to_dict()
        payload["empirical_δ"] = report.empirical_delta
        _emit(payload, out)
    if not report.passed:
        mu_bad, z_bad = report.arg_max_abs
        err.write(f"determinant bound violated at mu={mu_bad!r}, z={z_bad!r}: |det|={report.max_abs_det!r}\n")
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_witt(args, out, err) -> int:
    if (args.beta is None) == (args.spectrum is None):
        raise UsageError("witt needs exactly one of --beta or --spectrum")
    if args.spectrum is not None:
        try:
            spec = read_spectrum_file(args.spectrum)
        except OSError as exc:
            raise UsageError(f"cannot read spectrum file: {exc}")
    else:
        spec = circle_spectrum(args.beta, args.spin, args.cutoff)
    gap = witt_gap_check(spec)
    roots = indicial_roots(spec)
    _emit(
        {
            "holds": gap.holds,
            "margin": str(gap.margin),
            "margin_decimal": float(gap.margin),
            "indicial_roots": [str(r) for r in roots.roots],
            "witt_consequence": roots.witt_consequence,
            "symmetric": spec.symmetric,
        },
        out,
    )
    return EXIT_OK


def cmd_transgression(args, out, err) -> int:
    value = circle_fiber_transgression(args.beta, args.self_intersection)
    _emit(
        {
            "beta": str(args.beta),
            "self_intersection": args.self_intersection,
            "value": str(value),
            "decimal": float(value),
        },
        out,
    )
    return EXIT_OK


def cmd_index4d(args, out, err) -> int:
    data = EdgeData4D(args.p1, args.self_intersection, args.beta)
    result = dirac_index_4d(data)
    _emit(
        {
            "index": str(result.value),
            "index_decimal": float(result.value),
            "integer": result.integer,
            "eta_limit": str(adiabatic_eta_limit(args.self_intersection)),
            "signature_correction": str(signature_correction(args.self_intersection, args.beta)),
        },
        out,
    )
    return EXIT_OK


def cmd_suite(args, out, err) -> int:
    cfg = quick_config() if args.quick else SuiteConfig()
    payload, timing = run_suite(cfg, _workers(args), args.inject_fault)
    if not args.no_timing:
        payload = dict(payload, timing=timing)
    out.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    for item in payload["items"]:
        err.write(f"{'PASS' if item['passed'] else 'FAIL'}  {item['name']:<18} {timing[item['name']]:.2f}s\n")
    if not payload["passed"]:
        for name in payload["failed"]:
            err.write(f"failed item: {name}\n")
        for v in next(i for i in payload["items"] if i["name"] == "inequalities")["details"]["violations"]:
            err.write(f"inequality {v['name']} violated at (mu, z) = ({v['at'][0]!r}, {v['at'][1]!r})\n")
        return EXIT_VIOLATION
    return EXIT_OK


COMMANDS = {
    "bessel": cmd_bessel,
    "verify-greens": cmd_verify_greens,
    "sweep-det": cmd_sweep_det,
    "witt": cmd_witt,
    "transgression": cmd_transgression,
    "index4d": cmd_index4d,
    "suite": cmd_suite,
}


def main(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("edgeindex: error: a subcommand is required")
        return COMMANDS[args.command](args, out, err)
    except UsageError as exc:
        err.write(f"{exc}\n")
        return EXIT_USAGE
    except NoConventionConverges as exc:
        err.write(f"invariant violated: {exc}\n")
        return EXIT_VIOLATION
    except (EdgeIndexError, ValueError) as exc:
        err.write(f"edgeindex: error: {exc}\n")
        return EXIT_USAGE


def entry() -> None:
    sys.exit(main())
