"""Normal symbols of the Calderon and APS boundary projectors.

Both symbols are 2x2 matrices on the ``(phi_+, phi_-)`` plane of a fiber
eigenvalue ``mu`` at frequency ``z = |eta|``:

* Calderon: ``N = z [[I_+ K_-, I_+ K_+], [I_- K_-, I_- K_+]]`` with
  ``I_+- = I_{|mu +- 1/2|}(z)`` and likewise for ``K``; rank one, trace one.
* APS: ``(Id + S) / 2`` with ``S = [[-mu, z], [z, mu]] / sqrt(mu^2 + z^2)``, the
  projection onto the negative eigenspace of the tangential symbol
  ``[[mu, -z], [-z, -mu]]``.

The module also provides the determinant of their difference (closed form
and matrix route), the grid sweep bounding it away from +-1, the recovery of
``N`` as a one-sided limit of the Green's matrix, and the finite-dimensional
homotopy of conjugated projections joining two nearby projections.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from edgeindex import bessel
from edgeindex.errors import DomainError, EmptyGrid, NormTooLarge, NotIdempotent, ShapeError
from edgeindex.model_operator import RIGHT_INVERSE_CONVENTION, ModelParams, SwapConvention, greens_matrix

DET_MARGIN = 1e-3
CALDERON_LIMIT_TOL = 1e-4
HOMOTOPY_IDEMPOTENT_TOL = 1e-8


class SymbolKind(str, enum.Enum):
    CALDERON = "calderon"
    APS = "aps"
    TANGENTIAL = "tangential"
    HOMOTOPY = "homotopy"
    OTHER = "other"


def spectral_norm(m) -> float:
    """Largest singular value of a real 2x2 matrix (closed form)."""
    m = np.asarray(m, dtype=float)
    fro2 = float(np.sum(m * m))
    det = float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    disc = max(fro2 * fro2 - 4.0 * det * det, 0.0)
    return math.sqrt(0.5 * (fro2 + math.sqrt(disc)))


@dataclass(frozen=True, eq=False)
class SymbolMatrix:
    entries: np.ndarray
    kind: SymbolKind = SymbolKind.OTHER

    def __post_init__(self):
        e = np.array(self.entries, dtype=float)
        if e.shape != (2, 2):
            raise ShapeError(f"symbol must be 2x2, got shape {e.shape}")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def trace(self) -> float:
        return float(self.entries[0, 0] + self.entries[1, 1])

    @property
    def det(self) -> float:
        e = self.entries
        return float(e[0, 0] * e[1, 1] - e[0, 1] * e[1, 0])

    def idempotency_defect(self) -> float:
        """``||P^2 - P||`` in the spectral norm."""
        e = self.entries
        return spectral_norm(e @ e - e)

    def __sub__(self, other: "SymbolMatrix") -> SymbolMatrix:
        return SymbolMatrix(self.entries - other.entries, SymbolKind.OTHER)


def _check_witt(mu: float, allow_non_witt: bool):
    if mu < 0.5 and not allow_non_witt:
        raise DomainError(f"mu = {mu} < 1/2; pass allow_non_witt=True to explore")


def calderon_entries(mu, z):
    """Vectorized Calderon symbol entries ``(n11, n12, n21, n22)``.

    Uses exponentially scaled Bessel values so the products stay finite for
    large ``z``.
    """
    mu = np.asarray(mu, dtype=float)
    z = np.asarray(z, dtype=float)
    a, b = np.abs(mu + 0.5), np.abs(mu - 0.5)
    ip, im = bessel.ive(a, z), bessel.ive(b, z)
    kp, km = bessel.kve(a, z), bessel.kve(b, z)
    return z * ip * km, z * ip * kp, z * im * km, z * im * kp


def calderon_symbol(mu: float, z: float, allow_non_witt: bool = False) -> SymbolMatrix:
    """The Calderon normal symbol ``N_{mu,z}``.

    Raises
    ------
    DomainError
        For ``z <= 0`` or ``mu < 1/2`` (unless ``allow_non_witt``).
    """
    if not z > 0:
        raise DomainError(f"z must be positive, got {z}")
    _check_witt(mu, allow_non_witt)
    n11, n12, n21, n22 = calderon_entries(mu, z)
    return SymbolMatrix(np.array([[n11, n12], [n21, n22]]), SymbolKind.CALDERON)


def aps_symbol(mu: float, z: float) -> SymbolMatrix:
    """``(Id + [[-mu, z], [z, mu]] / sqrt(mu^2 + z^2)) / 2``."""
    if z < 0:
        raise DomainError("z must be nonnegative")
    if mu == 0 and z == 0:
        raise DomainError("the APS symbol is undefined at (mu, z) = (0, 0)")
    s = math.hypot(mu, z)
    c, d = mu / s, z / s
    off = 0.5 * d
    return SymbolMatrix(np.array([[0.5 - 0.5 * c, off], [off, 0.5 + 0.5 * c]]), SymbolKind.APS)


def tangential_symbol(mu: float, z: float) -> SymbolMatrix:
    return SymbolMatrix(np.array([[mu, -z], [-z, -mu]]), SymbolKind.TANGENTIAL)


def determinant_closed_form(mu, z):
    """``det(N - N_APS)`` from the I/K closed form (vectorized)."""
    mu = np.asarray(mu, dtype=float)
    z = np.asarray(z, dtype=float)
    a, b = mu + 0.5, mu - 0.5
    ip, im = bessel.ive(a, z), bessel.ive(b, z)
    kp, km = bessel.kve(a, z), bessel.kve(b, z)
    s = np.hypot(mu, z)
    return -0.5 + 0.5 * z / s * (mu * (im * kp - ip * km) + z * (ip * kp + im * km))


def determinant_rewrites(mu, z) -> dict:
    """The determinant written via the Wronskian in either direction.

    ``plus`` trades ``I_- K_+`` for ``1/z - I_+ K_-``; ``minus`` trades
    ``I_+ K_-`` for ``1/z - I_- K_+``. Both equal :func:`determinant_closed_form`.
    """
    mu = np.asarray(mu, dtype=float)
    z = np.asarray(z, dtype=float)
    a, b = mu + 0.5, mu - 0.5
    ip, im = bessel.ive(a, z), bessel.ive(b, z)
    kp, km = bessel.kve(a, z), bessel.kve(b, z)
    s = np.hypot(mu, z)
    same = z * (ip * kp + im * km)
    plus = -0.5 + 0.5 * mu / s + 0.5 * z / s * (-2 * mu * ip * km + same)
    minus = -0.5 - 0.5 * mu / s + 0.5 * z / s * (2 * mu * im * kp + same)
    return {"closed": determinant_closed_form(mu, z), "plus": plus, "minus": minus}


def _difference_arrays(mu, z):
    """Entries of ``N - N_APS`` on broadcast arrays."""
    n11, n12, n21, n22 = calderon_entries(mu, z)
    mu = np.asarray(mu, dtype=float)
    z = np.asarray(z, dtype=float)
    s = np.hypot(mu, z)
    c, d = mu / s, z / s
    return n11 - (0.5 - 0.5 * c), n12 - 0.5 * d, n21 - 0.5 * d, n22 - (0.5 + 0.5 * c)


def _spectral_norm_arrays(d11, d12, d21, d22):
    fro2 = d11 * d11 + d12 * d12 + d21 * d21 + d22 * d22
    det = d11 * d22 - d12 * d21
    disc = np.maximum(fro2 * fro2 - 4.0 * det * det, 0.0)
    return np.sqrt(0.5 * (fro2 + np.sqrt(disc)))


@dataclass(frozen=True)
class DeterminantValue:
    matrix_route: float
    closed_form: float

    @property
    def discrepancy(self) -> float:
        return abs(self.matrix_route - self.closed_form)

    @property
    def value(self) -> float:
        return self.closed_form


def difference_determinant(mu: float, z: float, allow_non_witt: bool = False) -> DeterminantValue:
    """``det(N - N_APS)`` by both routes; they must agree to 1e-10."""
    n = calderon_symbol(mu, z, allow_non_witt)
    p = aps_symbol(mu, z)
    return DeterminantValue((n - p).det, float(determinant_closed_form(mu, z)))


def det_sweep_row(mu: float, z_grid) -> dict:
    """Sweep quantities for one ``mu`` across ``z_grid`` (one parallel work unit)."""
    z = np.asarray(z_grid, dtype=float)
    m = np.full_like(z, float(mu))
    d11, d12, d21, d22 = _difference_arrays(m, z)
    det_matrix = d11 * d22 - d12 * d21
    n11, n12, n21, n22 = calderon_entries(m, z)
    # N^2 - N, spectral norm
    e11 = n11 * n11 + n12 * n21 - n11
    e12 = n11 * n12 + n12 * n22 - n12
    e21 = n21 * n11 + n22 * n21 - n21
    e22 = n21 * n12 + n22 * n22 - n22
    s = np.hypot(m, z)
    c, d = m / s, z / s
    a11, a12, a22 = 0.5 - 0.5 * c, 0.5 * d, 0.5 + 0.5 * c
    f11 = a11 * a11 + a12 * a12 - a11
    f12 = a11 * a12 + a12 * a22 - a12
    f22 = a12 * a12 + a22 * a22 - a22
    return {
        "mu": m,
        "z": z,
        "det": determinant_closed_form(m, z),
        "det_matrix": det_matrix,
        "op_norm": _spectral_norm_arrays(d11, d12, d21, d22),
        "trace_err": np.abs(d11 + d22),
        "calderon_trace_err": np.abs(n11 + n22 - 1.0),
        "calderon_idempotency": _spectral_norm_arrays(e11, e12, e21, e22),
        "aps_idempotency": _spectral_norm_arrays(f11, f12, f12, f22),
    }


@dataclass(frozen=True)
class DetSweepReport:
    max_det: float
    min_det: float
    arg_max: tuple
    arg_min: tuple
    max_abs_det: float
    arg_max_abs: tuple
    empirical_delta: float
    max_route_discrepancy: float
    max_op_norm: float
    max_trace_err: float
    max_calderon_trace_err: float
    max_calderon_idempotency: float
    max_aps_idempotency: float
    n_points: int
    margin: float = DET_MARGIN

    @property
    def passed(self) -> bool:
        return self.max_abs_det <= 1.0 - self.margin and self.max_route_discrepancy <= 1e-10

    def to_dict(self) -> dict:
        return {
            "max_det": self.max_det,
            "min_det": self.min_det,
            "arg_max": list(self.arg_max),
            "arg_min": list(self.arg_min),
            "max_abs_det": self.max_abs_det,
            "arg_max_abs": list(self.arg_max_abs),
            "empirical_delta": self.empirical_delta,
            "max_route_discrepancy": self.max_route_discrepancy,
            "max_op_norm": self.max_op_norm,
            "max_trace_err": self.max_trace_err,
            "max_calderon_trace_err": self.max_calderon_trace_err,
            "max_calderon_idempotency": self.max_calderon_idempotency,
            "max_aps_idempotency": self.max_aps_idempotency,
            "n_points": self.n_points,
            "passed": self.passed,
        }


def stack_rows(rows: list) -> dict:
    """Concatenate per-``mu`` rows in grid order."""
    return {k: np.concatenate([r[k] for r in rows]) for k in rows[0]}


def summarize_sweep(table: dict, margin: float = DET_MARGIN) -> DetSweepReport:
    """Reduce a stacked sweep table; ties resolve to the first point in grid order."""
    det = table["det"]
    mu, z = table["mu"], table["z"]

    def at(i):
        return (float(mu[i]), float(z[i]))

    i_max, i_min = int(np.argmax(det)), int(np.argmin(det))
    i_abs = int(np.argmax(np.abs(det)))
    max_abs = float(abs(det[i_abs]))
    return DetSweepReport(
        max_det=float(det[i_max]),
        min_det=float(det[i_min]),
        arg_max=at(i_max),
        arg_min=at(i_min),
        max_abs_det=max_abs,
        arg_max_abs=at(i_abs),
        empirical_delta=1.0 - max_abs,
        max_route_discrepancy=float(np.max(np.abs(det - table["det_matrix"]))),
        max_op_norm=float(np.max(table["op_norm"])),
        max_trace_err=float(np.max(table["trace_err"])),
        max_calderon_trace_err=float(np.max(table["calderon_trace_err"])),
        max_calderon_idempotency=float(np.max(table["calderon_idempotency"])),
        max_aps_idempotency=float(np.max(table["aps_idempotency"])),
        n_points=int(det.size),
        margin=margin,
    )


def det_bound_sweep(mu_grid, z_grid, margin: float = DET_MARGIN) -> DetSweepReport:
    """Scan ``det(N - N_APS)`` over a product grid.

    Raises
    ------
    EmptyGrid
        If either grid is empty.
    """
    mu_grid = list(np.atleast_1d(np.asarray(mu_grid, dtype=float)))
    z_grid = np.atleast_1d(np.asarray(z_grid, dtype=float))
    if not mu_grid or z_grid.size == 0:
        raise EmptyGrid("determinant sweep needs nonempty mu and z grids")
    if min(mu_grid) < 0.5 or np.any(z_grid <= 0):
        raise DomainError("sweep grids need mu >= 1/2 and z > 0")
    return summarize_sweep(stack_rows([det_sweep_row(m, z_grid) for m in mu_grid]), margin)


@dataclass(frozen=True)
class NormDetReport:
    op_norm: float
    sqrt_abs_det: float
    spectral_radius: float
    trace: float

    @property
    def both_below_one(self) -> bool:
        return self.op_norm < 1.0 and self.sqrt_abs_det < 1.0

    @property
    def gap(self) -> float:
        """``op_norm - sqrt|det|``; zero only for normal differences."""
        return self.op_norm - self.sqrt_abs_det


def norm_vs_det_check(mu: float, z: float) -> NormDetReport:
    """Compare the spectral norm of ``N - N_APS`` with ``sqrt|det|``.

    The difference has trace zero, so its eigenvalues are ``+-sqrt(-det)`` and
    ``sqrt|det|`` is its spectral radius. The matrix is not normal, so the
    norm can exceed the radius; both are reported.
    """
    d = calderon_symbol(mu, z) - aps_symbol(mu, z)
    det = d.det
    return NormDetReport(
        op_norm=spectral_norm(d.entries),
        sqrt_abs_det=math.sqrt(abs(det)),
        spectral_radius=math.sqrt(abs(det)),
        trace=d.trace,
    )


@dataclass(frozen=True)
class CalderonLimitReport:
    """One-sided limit of the Green's matrix at the diagonal.

    ``raw_*`` fields use the unadjusted Green's matrix; the adjusted
    fields multiply it by ``kernel_sign``, the sign that makes it the kernel
    acting on ``(-b, a)`` under the convention selected for the right inverse.
    ``fitted_constant`` is the least-squares scalar ``c`` with ``c M ~ N`` at the
    last point, recorded rather than absorbed.
    """

    sigma: tuple
    deviation_curve: tuple
    raw_deviation_curve: tuple
    limit_matrix: np.ndarray
    raw_limit_matrix: np.ndarray
    calderon: np.ndarray
    fitted_constant: float
    kernel_sign: int
    tail_monotone: bool
    tol: float = CALDERON_LIMIT_TOL

    @property
    def final_deviation(self) -> float:
        return self.deviation_curve[-1]

    @property
    def raw_final_deviation(self) -> float:
        return self.raw_deviation_curve[-1]

    @property
    def passed(self) -> bool:
        return self.final_deviation < self.tol

    def to_dict(self) -> dict:
        return {
            "final_deviation": self.final_deviation,
            "raw_final_deviation": self.raw_final_deviation,
            "fitted_constant": self.fitted_constant,
            "kernel_sign": self.kernel_sign,
            "tail_monotone": self.tail_monotone,
            "limit_matrix": self.limit_matrix.tolist(),
            "raw_limit_matrix": self.raw_limit_matrix.tolist(),
            "calderon": self.calderon.tolist(),
            "passed": self.passed,
        }


def calderon_from_greens_limit(
    params: ModelParams,
    sigma_sequence,
    convention: SwapConvention = RIGHT_INVERSE_CONVENTION,
) -> CalderonLimitReport:
    """Evaluate ``M(sigma, 1)`` as ``sigma`` increases to 1 and compare with ``N``."""
    seq = np.asarray(sigma_sequence, dtype=float)
    if seq.size == 0:
        raise EmptyGrid("sigma sequence is empty")
    if np.any(seq <= 0) or np.any(seq >= 1) or np.any(np.diff(seq) <= 0):
        raise DomainError("sigma sequence must increase strictly inside (0, 1)")
    if seq[-1] < 1 - 1e-6:
        raise DomainError("sigma sequence must end within 1e-6 of 1")
    n = calderon_symbol(params.mu, params.eta, allow_non_witt=not params.is_witt).entries
    sign = convention.kernel_sign
    raw_dev, dev = [], []
    m = None
    for s in seq:
        m = greens_matrix(params, float(s), 1.0)
        raw_dev.append(spectral_norm(m - n))
        dev.append(spectral_norm(sign * m - n))
    fitted = float(np.sum(m * n) / np.sum(m * m))
    tail = dev[-min(len(dev), 5):]
    monotone = all(b <= a for a, b in zip(tail, tail[1:]))
    return CalderonLimitReport(
        sigma=tuple(float(s) for s in seq),
        deviation_curve=tuple(dev),
        raw_deviation_curve=tuple(raw_dev),
        limit_matrix=sign * m,
        raw_limit_matrix=m,
        calderon=n,
        fitted_constant=fitted,
        kernel_sign=sign,
        tail_monotone=monotone,
    )


def projector_homotopy(P: SymbolMatrix, Q: SymbolMatrix, t: float, reversed_order: bool = False) -> SymbolMatrix:
    """Projections ``F_t`` joining ``P`` (t=0) to ``Q`` (t=1).

    With ``T_t = Id + t (Q - P)(2P - Id)`` one has ``T_1 P = Q T_1``, so the
    conjugate ``F_t = T_t P T_t^{-1}`` ends at ``Q``. ``reversed_order=True``
    returns ``T_t^{-1} P T_t`` instead, which ends at ``T_1^{-1} P T_1`` and
    generally misses ``Q``; it is kept for comparison.

    Raises
    ------
    NotIdempotent
        If ``P`` or ``Q`` is not a projection to 1e-8.
    NormTooLarge
        If ``||P - Q|| >= 1`` (``T_t`` may then be singular).
    """
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t must lie in [0, 1], got {t}")
    for name, m in (("P", P), ("Q", Q)):
        defect = m.idempotency_defect()
        if defect > HOMOTOPY_IDEMPOTENT_TOL:
            raise NotIdempotent(f"{name} is not idempotent: ||{name}^2 - {name}|| = {defect:.3e}")
    p, q = P.entries, Q.entries
    gap = spectral_norm(p - q)
    if gap >= 1.0:
        raise NormTooLarge(f"||P - Q|| = {gap:.6f} >= 1")
    if t == 0.0:
        return SymbolMatrix(p, SymbolKind.HOMOTOPY)
    eye = np.eye(2)
    T = eye + t * (q - p) @ (2 * p - eye)
    if reversed_order:
        return SymbolMatrix(np.linalg.solve(T, p @ T), SymbolKind.HOMOTOPY)
    # T P T^{-1} = (T^{-T} (T P)^T)^T
    return SymbolMatrix(np.linalg.solve(T.T, (T @ p).T).T, SymbolKind.HOMOTOPY)
