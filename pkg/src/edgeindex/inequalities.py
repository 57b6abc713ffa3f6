"""Grid checks of the Bessel inequalities that bound ``det(N - N_APS)``.

Each check returns an :class:`InequalityReport` naming the worst grid point,
so a violation can be replayed. Residuals are arranged so that the
inequality reads ``residual >= 0``; ``slack`` absorbs rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from edgeindex import bessel
from edgeindex.projectors import determinant_closed_form

SQRT2 = math.sqrt(2.0)
EQ_FRACTION_AT_HALF = 1.0 + SQRT2
UPPER_CONSTANT = 0.25 * (2.0 + SQRT2)

CONFINEMENT_ORDERS = (0.5, 0.75, 1.0, 2.0, 5.0, 10.0)


@dataclass(frozen=True)
class InequalityReport:
    name: str
    holds: bool
    worst_residual: float
    worst_at: tuple
    n_points: int
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "holds": self.holds,
            "worst_residual": self.worst_residual,
            "worst_at": list(self.worst_at),
            "n_points": self.n_points,
            "detail": self.detail,
        }


def _report(name, residual, first, second, slack, detail="") -> InequalityReport:
    """Build a report from a residual array that should be ``>= -slack``."""
    residual = np.asarray(residual, dtype=float)
    flat = residual.ravel()
    bad = ~np.isfinite(flat)
    if np.any(bad):
        i = int(np.argmax(bad))
        worst = float("nan")
    else:
        i = int(np.argmin(flat))
        worst = float(flat[i])
    a = np.broadcast_to(first, residual.shape).ravel()
    b = np.broadcast_to(second, residual.shape).ravel()
    holds = bool(not np.any(bad) and worst >= -slack)
    return InequalityReport(name, holds, worst, (float(a[i]), float(b[i])), int(flat.size), detail)


def fraction(mu, z):
    """``(sqrt(z^2 + (mu+1/2)^2) + mu + 1/2) / (sqrt(z^2 + (mu-1/2)^2) + mu - 1/2)``."""
    mu = np.asarray(mu, dtype=float)
    z = np.asarray(z, dtype=float)
    return (np.hypot(z, mu + 0.5) + mu + 0.5) / (np.hypot(z, mu - 0.5) + mu - 0.5)


def scaled_product(nu, z):
    """``z I_nu(z) K_nu(z)``."""
    return np.asarray(z) * bessel.ive(nu, z) * bessel.kve(nu, z)


def confinement_check(orders=CONFINEMENT_ORDERS, z_grid=None, slack: float = 1e-13) -> list:
    """``0 <= z I K <= 1/2``, ``z I K`` increasing and ``I K`` decreasing in ``z``."""
    z = np.geomspace(1e-3, 100, 500) if z_grid is None else np.asarray(z_grid, dtype=float)
    nu = np.asarray(orders, dtype=float)[:, None]
    p = scaled_product(nu, z[None, :])
    lower = _report("product_nonnegative", p, nu, z, 0.0)
    upper = _report("product_at_most_half", 0.5 - p, nu, z, slack)
    mono = _report(
        "product_monotone_in_z", np.diff(p, axis=1), nu, z[None, 1:], slack, "z I K increasing along z"
    )
    # relative steps of I K, so the check is scale free across the grid
    ik = p / z[None, :]
    decay = _report(
        "unscaled_product_decreasing", -np.diff(ik, axis=1) / ik[:, 1:], nu, z[None, 1:], slack, "I K decreasing along z"
    )
    return [lower, upper, mono, decay]


def log_derivative_sum(nu, z):
    """``z K'/K + z I'/I = 2 nu + z (I_{nu+1}/I_nu - K_{nu+1}/K_nu)``."""
    z = np.asarray(z, dtype=float)
    return 2 * np.asarray(nu, dtype=float) + z * (bessel.i_ratio(nu, z) - bessel.k_ratio(nu, z))


def log_derivative_sum_check(orders=CONFINEMENT_ORDERS, z_grid=None, slack: float = 1e-12) -> list:
    """The log-derivative sum lies in ``[-1, 0]`` and decreases in ``z``."""
    z = np.geomspace(1e-3, 100, 500) if z_grid is None else np.asarray(z_grid, dtype=float)
    nu = np.asarray(orders, dtype=float)[:, None]
    s = log_derivative_sum(nu, z[None, :])
    scale = 1.0 + 2 * nu
    return [
        _report("log_derivative_sum_at_most_zero", -s / scale, nu, z, slack),
        _report("log_derivative_sum_at_least_minus_one", (s + 1) / scale, nu, z, slack),
        _report("log_derivative_sum_decreasing", -np.diff(s, axis=1) / scale, nu, z[None, 1:], slack),
    ]


def baricz_residuals(nu, z):
    """Relative residuals of ``z I'/I < sqrt(z^2+nu^2)`` and ``z K'/K < -sqrt(z^2+nu^2)``.

    Written with the ratios ``I_{nu+1}/I_nu`` and ``K_{nu+1}/K_nu`` so the
    subtraction of ``nu`` is done exactly: the I-form becomes
    ``I_{nu+1}/I_nu < z / (sqrt(z^2+nu^2) + nu)``.
    """
    nu = np.asarray(nu, dtype=float)
    z = np.asarray(z, dtype=float)
    root = np.hypot(z, nu)
    bound_i = z / (root + nu)
    res_i = (bound_i - bessel.i_ratio(nu, z)) / bound_i
    zk = z * bessel.k_ratio(nu, z)
    res_k = (zk - nu - root) / zk
    return res_i, res_k


def baricz_check(nu_grid=None, z_grid=None, slack: float = 1e-12) -> list:
    nu = np.linspace(0, 20, 200) if nu_grid is None else np.asarray(nu_grid, dtype=float)
    z = np.geomspace(1e-3, 50, 200) if z_grid is None else np.asarray(z_grid, dtype=float)
    n2, z2 = np.meshgrid(nu, z, indexing="ij")
    ri, rk = baricz_residuals(n2, z2)
    return [
        _report("baricz_i_log_derivative", ri, n2, z2, slack),
        _report("baricz_k_log_derivative", rk, n2, z2, slack),
    ]


def amos_residual(mu, z):
    """Relative residual of ``I_{mu-1/2} >= (mu - 1/2 + sqrt(z^2 + (mu+3/2)^2)) I_{mu+1/2} / z``."""
    mu = np.asarray(mu, dtype=float)
    z = np.asarray(z, dtype=float)
    c = (mu - 0.5 + np.hypot(z, mu + 1.5)) / z
    return 1.0 - c * bessel.i_ratio(mu - 0.5, z)


def amos_check(mu_grid=None, z_grid=None, slack: float = 1e-12) -> list:
    mu = np.linspace(0.5, 10, 50) if mu_grid is None else np.asarray(mu_grid, dtype=float)
    z = np.geomspace(1e-3, 100, 500) if z_grid is None else np.asarray(z_grid, dtype=float)
    m2, z2 = np.meshgrid(mu, z, indexing="ij")
    return [_report("amos_lower_ratio", amos_residual(m2, z2), m2, z2, slack)]


def upper_bound_chain(mu, z) -> dict:
    """The determinant and the two successive upper bounds for it.

    ``dropped`` discards the negative ``mu`` terms; ``fraction_bound`` replaces
    ``I_- K_-`` by ``fraction * I_+ K_+``.
    """
    mu = np.asarray(mu, dtype=float)
    z = np.asarray(z, dtype=float)
    s = np.hypot(mu, z)
    pp = scaled_product(mu + 0.5, z)
    mm = scaled_product(mu - 0.5, z)
    return {
        "det": determinant_closed_form(mu, z),
        "dropped": 0.5 * z / s * (pp + mm),
        "fraction_bound": 0.5 * z / s * pp * (1 + fraction(mu, z)),
        "product_gap": fraction(mu, z) * pp - mm,
    }


def one_plus_sqrt2_check(mu_grid=None, z_large=None, z_small=None, slack: float = 1e-12) -> list:
    """The chain ending in ``(2 + sqrt 2) / 4`` on ``mu in [1/2, 1]``.

    For ``z >= 1``: ``det <= dropped <= fraction_bound <= (1 + fraction(mu, 1)) / 4``.
    For ``z <= 1``: ``fraction_bound <= z (1 + fraction(mu, z)) / 4``, which
    increases in ``z`` and so stays below its value at ``z = 1``. In both
    cases ``(1 + fraction(mu, 1)) / 4 <= (2 + sqrt 2) / 4``, with
    ``fraction(mu, 1)`` decreasing in ``mu`` and equal to ``1 + sqrt 2`` at 1/2.
    """
    mu = np.linspace(0.5, 1.0, 51) if mu_grid is None else np.asarray(mu_grid, dtype=float)
    zl = np.geomspace(1, 100, 200) if z_large is None else np.asarray(z_large, dtype=float)
    zs = np.geomspace(1e-3, 1, 200) if z_small is None else np.asarray(z_small, dtype=float)
    out = []
    m2, z2 = np.meshgrid(mu, zl, indexing="ij")
    ch = upper_bound_chain(m2, z2)
    cap = 0.25 * (1 + fraction(m2, 1.0))
    out.append(_report("det_below_dropped_bound", ch["dropped"] - ch["det"], m2, z2, slack))
    out.append(_report("product_fraction_bound", ch["product_gap"] / ch["dropped"], m2, z2, slack))
    out.append(_report("fraction_decreasing_in_z", -np.diff(fraction(m2, z2), axis=1), m2[:, 1:], z2[:, 1:], slack))
    out.append(_report("chain_below_unit_fraction", cap - ch["fraction_bound"], m2, z2, slack))
    m2, z2 = np.meshgrid(mu, zs, indexing="ij")
    ch = upper_bound_chain(m2, z2)
    small = 0.25 * z2 * (1 + fraction(m2, z2))
    out.append(_report("small_z_chain", small - ch["fraction_bound"], m2, z2, slack))
    out.append(_report("small_z_bound_increasing", np.diff(small, axis=1), m2[:, 1:], z2[:, 1:], slack))
    out.append(_report("small_z_det_bound", small - ch["det"], m2, z2, slack))
    f1 = fraction(mu, 1.0)
    out.append(_report("unit_fraction_decreasing_in_mu", -np.diff(f1), mu[1:], np.ones(mu.size - 1), slack))
    out.append(_report("unit_fraction_at_half", np.array([slack - abs(float(fraction(0.5, 1.0)) - EQ_FRACTION_AT_HALF)]),
                       np.array([0.5]), np.array([1.0]), 0.0))
    out.append(_report("unit_fraction_cap", UPPER_CONSTANT - 0.25 * (1 + f1), mu, np.ones(mu.size), slack))
    return out


def large_mu_check(mu_grid=None, z_grid=None, slack: float = 1e-12) -> list:
    """For ``mu >= 1`` the dropped bound is at most 1/2."""
    mu = np.linspace(1, 10, 37) if mu_grid is None else np.asarray(mu_grid, dtype=float)
    z = np.geomspace(1e-3, 100, 500) if z_grid is None else np.asarray(z_grid, dtype=float)
    m2, z2 = np.meshgrid(mu, z, indexing="ij")
    ch = upper_bound_chain(m2, z2)
    return [_report("large_mu_dropped_at_most_half", 0.5 - ch["dropped"], m2, z2, slack)]


def _quick_grids() -> dict:
    zc = np.geomspace(1e-3, 100, 100)
    return {
        "confinement": {"z_grid": zc},
        "log_derivative_sum": {"z_grid": zc},
        "baricz": {"nu_grid": np.linspace(0, 20, 40), "z_grid": np.geomspace(1e-3, 50, 40)},
        "amos": {"mu_grid": np.linspace(0.5, 10, 10), "z_grid": zc},
        "one_plus_sqrt2": {
            "mu_grid": np.linspace(0.5, 1, 11),
            "z_large": np.geomspace(1, 100, 40),
            "z_small": np.geomspace(1e-3, 1, 40),
        },
        "large_mu": {"mu_grid": np.linspace(1, 10, 10), "z_grid": zc},
    }


CHECK_GROUPS = {
    "confinement": confinement_check,
    "log_derivative_sum": log_derivative_sum_check,
    "baricz": baricz_check,
    "amos": amos_check,
    "one_plus_sqrt2": one_plus_sqrt2_check,
    "large_mu": large_mu_check,
}


def check_group(name: str, quick: bool = False) -> list:
    """One group of checks on its default grid (coarser when ``quick``)."""
    kwargs = _quick_grids()[name] if quick else {}
    return CHECK_GROUPS[name](**kwargs)


def all_inequality_checks(quick: bool = False) -> list:
    return [r for name in CHECK_GROUPS for r in check_group(name, quick)]
