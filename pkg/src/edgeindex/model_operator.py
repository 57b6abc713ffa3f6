r"""The 2x2 model operator on one joint eigenspace of the fiber Dirac operator.

On the span of ``phi_+`` and ``phi_-`` (eigenvalue ``mu`` of the fiber operator,
``+-1`` of ``i c(eta_hat)``) the Fourier-transformed normal operator ``L`` acts
on ``(a, b)`` through

.. math::
    -c_\nu L = \sigma\partial_\sigma + f/2
      + \begin{pmatrix} \mu & -\sigma|\eta| \\ -\sigma|\eta| & -\mu \end{pmatrix},
    \qquad c_\nu (a, b) = (-b, a).

This module evaluates that operator on sampled fields, its Bessel kernel, the
explicit Green's matrix, and checks numerically that the resulting integral
operator is a right inverse of ``L``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline

from edgeindex import bessel
from edgeindex.errors import (
    DiagonalError,
    DomainError,
    GridMismatch,
    NoConventionConverges,
    SupportError,
)

SUPPORT_RTOL = 1e-8
MAX_EXPONENT_SPAN = 1400.0


@dataclass(frozen=True)
class ModelParams:
    """Fiber eigenvalue ``mu``, base frequency ``eta = |eta|`` and fiber dimension ``f``.

    ``|mu| >= 1/2`` (the geometric Witt condition) is enforced unless the
    instance is built through :meth:`non_witt`.
    """

    mu: float
    eta: float
    f: int
    allow_non_witt: bool = False

    def __post_init__(self):
        if not isinstance(self.f, (int, np.integer)) or self.f < 1:
            raise DomainError(f"fiber dimension must be an integer >= 1, got {self.f!r}")
        if not (math.isfinite(self.eta) and self.eta >= 0):
            raise DomainError(f"|eta| must be finite and >= 0, got {self.eta!r}")
        if not math.isfinite(self.mu):
            raise DomainError("mu must be finite")
        if abs(self.mu) < 0.5 and not self.allow_non_witt:
            raise DomainError(
                f"|mu| = {abs(self.mu)} < 1/2 violates the Witt condition; "
                "use ModelParams.non_witt for exploration"
            )

    @classmethod
    def non_witt(cls, mu: float, eta: float, f: int) -> "ModelParams":
        return cls(mu, eta, f, allow_non_witt=True)

    @property
    def is_witt(self) -> bool:
        return abs(self.mu) >= 0.5

    @property
    def orders(self) -> tuple[float, float]:
        """``(|mu + 1/2|, |mu - 1/2|)``."""
        return abs(self.mu + 0.5), abs(self.mu - 0.5)


@dataclass(frozen=True, eq=False)
class RadialGrid:
    nodes: np.ndarray
    spacing: str = "custom"

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise DomainError("a radial grid needs at least two nodes")
        if nodes[0] <= 0 or np.any(np.diff(nodes) <= 0):
            raise DomainError("grid nodes must be positive and strictly increasing")
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def uniform(cls, start: float, stop: float, n: int) -> "RadialGrid":
        return cls(np.linspace(start, stop, n), "uniform")

    @classmethod
    def with_step(cls, start: float, stop: float, h: float) -> "RadialGrid":
        n = int(round((stop - start) / h)) + 1
        return cls(start + h * np.arange(n), "uniform")

    @classmethod
    def geometric(cls, start: float, stop: float, n: int) -> "RadialGrid":
        return cls(np.geomspace(start, stop, n), "geometric")

    def refined(self) -> "RadialGrid":
        """Halve every cell (geometric midpoints on geometric grids)."""
        x = self.nodes
        mid = np.sqrt(x[:-1] * x[1:]) if self.spacing == "geometric" else 0.5 * (x[:-1] + x[1:])
        out = np.empty(2 * x.size - 1)
        out[0::2] = x
        out[1::2] = mid
        return RadialGrid(out, self.spacing)

    @property
    def max_step(self) -> float:
        return float(np.max(np.diff(self.nodes)))

    def __len__(self) -> int:
        return self.nodes.size


@dataclass(frozen=True, eq=False)
class Vector2Field:
    """Samples of ``a phi_+ + b phi_-`` on a radial grid.

    ``source`` optionally keeps the generating function so the field can be
    resampled exactly on refined grids.
    """

    a: np.ndarray
    b: np.ndarray
    source: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if a.shape != b.shape:
            raise GridMismatch(f"component shapes differ: {a.shape} vs {b.shape}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def sample(cls, fn: Callable, grid: RadialGrid) -> "Vector2Field":
        a, b = fn(grid.nodes)
        return cls(np.broadcast_to(a, grid.nodes.shape), np.broadcast_to(b, grid.nodes.shape), fn)

    def on(self, grid: RadialGrid, old_grid: RadialGrid) -> "Vector2Field":
        """This field on ``grid``: resampled from ``source`` or spline-interpolated."""
        if self.source is not None:
            return Vector2Field.sample(self.source, grid)
        x = old_grid.nodes
        return Vector2Field(CubicSpline(x, self.a)(grid.nodes), CubicSpline(x, self.b)(grid.nodes))

    def sup_norm(self) -> float:
        if self.a.size == 0:
            return 0.0
        return float(max(np.max(np.abs(self.a)), np.max(np.abs(self.b))))

    def scaled(self, c: float) -> "Vector2Field":
        src = None if self.source is None else (lambda s, fn=self.source: tuple(c * v for v in fn(s)))
        return Vector2Field(c * self.a, c * self.b, src)

    def __sub__(self, other: "Vector2Field") -> "Vector2Field":
        return Vector2Field(self.a - other.a, self.b - other.b)


class SwapConvention(str, enum.Enum):
    """How the right-hand side ``(a, b)`` is fed to the Green's matrix."""

    MINUS_B_A = "(-b,a)"
    B_MINUS_A = "(b,-a)"

    def apply(self, a, b):
        if self is SwapConvention.MINUS_B_A:
            return -b, a
        return b, -a

    @property
    def kernel_sign(self) -> int:
        """Sign turning the kernel into one acting on ``(-b, a)``."""
        return 1 if self is SwapConvention.MINUS_B_A else -1


# Selected by verify_right_inverse; see tests/test_model_operator.py for the regression.
RIGHT_INVERSE_CONVENTION = SwapConvention.B_MINUS_A


def _check_grid(field_: Vector2Field, grid: RadialGrid):
    if field_.a.shape != grid.nodes.shape:
        raise GridMismatch(f"field has {field_.a.size} samples, grid has {grid.nodes.size} nodes")


def reduced_operator_apply(params: ModelParams, field_: Vector2Field, grid: RadialGrid) -> Vector2Field:
    """Apply ``-c_nu L`` to sampled ``(a, b)``.

    ``sigma d/dsigma`` uses second-order centered differences on the (possibly
    non-uniform) grid, one-sided at the two end nodes; the matrix part is exact.
    """
    _check_grid(field_, grid)
    s = grid.nodes
    da = np.gradient(field_.a, s, edge_order=2)
    db = np.gradient(field_.b, s, edge_order=2)
    half_f = 0.5 * params.f
    ra = s * da + (half_f + params.mu) * field_.a - s * params.eta * field_.b
    rb = s * db + (half_f - params.mu) * field_.b - s * params.eta * field_.a
    return Vector2Field(ra, rb)


def full_operator_apply(params: ModelParams, field_: Vector2Field, grid: RadialGrid) -> Vector2Field:
    """Apply ``L = c_nu (-c_nu L)`` with ``c_nu (a, b) = (-b, a)``."""
    r = reduced_operator_apply(params, field_, grid)
    return Vector2Field(-r.b, r.a)


def homogeneous_solutions(params: ModelParams, sigma):
    """Kernel elements ``(I_sol, K_sol)`` of the reduced operator at ``sigma``.

    For ``eta > 0``::

        I_sol = sigma**(1/2 - f/2) * ( I_{|mu+1/2|}(eta sigma),  I_{|mu-1/2|}(eta sigma))
        K_sol = sigma**(1/2 - f/2) * (-K_{|mu+1/2|}(eta sigma),  K_{|mu-1/2|}(eta sigma))

    For ``eta = 0`` the system decouples into Euler equations and the power
    solutions ``sigma**(-f/2 - mu)`` (first slot) and ``sigma**(-f/2 + mu)``
    (second slot) are returned, the growing one as ``I_sol``.

    Each returned array has shape ``(2,) + shape(sigma)``.
    """
    s = np.asarray(sigma, dtype=float)
    if np.any(s <= 0) or not np.all(np.isfinite(s)):
        raise DomainError("sigma must be positive")
    zero = np.zeros_like(s)
    if params.eta == 0:
        ea = -0.5 * params.f - params.mu
        eb = -0.5 * params.f + params.mu
        if eb >= ea:
            return np.array([zero, s**eb]), np.array([-(s**ea), zero])
        return np.array([s**ea, zero]), np.array([zero, s**eb])
    n_plus, n_minus = params.orders
    z = params.eta * s
    pref = s ** (0.5 - 0.5 * params.f)
    i_sol = pref * np.array([bessel.bessel_i(n_plus, z), bessel.bessel_i(n_minus, z)])
    k_sol = pref * np.array([-bessel.bessel_k(n_plus, z), bessel.bessel_k(n_minus, z)])
    return i_sol, k_sol


def annihilation_residual(params: ModelParams, sigma):
    """Reduced operator applied analytically to ``I_sol`` and ``K_sol``.

    Derivatives come from the Bessel recurrences, so the result is zero up to
    rounding. Returns ``(res_I, res_K, scale)`` where ``scale`` bounds the size
    of the individual terms (for relative comparisons).
    """
    if params.eta <= 0:
        raise DomainError("analytic annihilation check needs eta > 0")
    s = np.asarray(sigma, dtype=float)
    n_plus, n_minus = params.orders
    z = params.eta * s
    p = 0.5 - 0.5 * params.f
    pref = s**p
    half_f = 0.5 * params.f
    mu = params.mu

    def apply(fa, dfa, fb, dfb):
        # sigma d/dsigma [sigma^p F(eta sigma)] = sigma^p (p F + z F')
        ra = pref * (p * fa + z * dfa) + (half_f + mu) * pref * fa - z * pref * fb
        rb = pref * (p * fb + z * dfb) + (half_f - mu) * pref * fb - z * pref * fa
        scale = pref * (np.abs(p * fa) + np.abs(z * dfa) + np.abs((half_f + mu) * fa) + np.abs(z * fb)
                        + np.abs(p * fb) + np.abs(z * dfb) + np.abs((half_f - mu) * fb) + np.abs(z * fa))
        return np.array([ra, rb]), scale

    ia, ib = bessel.bessel_i(n_plus, z), bessel.bessel_i(n_minus, z)
    dia, dib = bessel.bessel_i_prime(n_plus, z), bessel.bessel_i_prime(n_minus, z)
    res_i, sc_i = apply(ia, dia, ib, dib)
    ka, kb = -bessel.bessel_k(n_plus, z), bessel.bessel_k(n_minus, z)
    dka, dkb = -bessel.bessel_k_prime(n_plus, z), bessel.bessel_k_prime(n_minus, z)
    res_k, sc_k = apply(ka, dka, kb, dkb)
    return res_i, res_k, np.maximum(sc_i, sc_k)


def _kernel_factors(params: ModelParams, s):
    """Scaled column/row factors of the Green's matrix at ``eta * s``."""
    n_plus, n_minus = params.orders
    z = params.eta * s
    ip, im = bessel.ive(n_plus, z), bessel.ive(n_minus, z)
    kp, km = bessel.kve(n_plus, z), bessel.kve(n_minus, z)
    col_i = np.array([ip, im])
    col_k = np.array([-kp, km])
    row_k = np.array([-km, -kp])
    row_i = np.array([-im, ip])
    return col_i, col_k, row_k, row_i


def greens_matrix(params: ModelParams, sigma: float, sigma_t: float) -> np.ndarray:
    """The Green's matrix ``M_{mu,|eta|}(sigma, sigma~)`` in raw form (no sign adjustment).

    ``(sigma sigma~)^{1/2} |eta| F(|eta| sigma) S(|eta| sigma~)`` where ``F`` has
    columns ``(I_+, I_-)`` and ``(-K_+, K_-)`` and ``S`` holds the
    Heaviside-gated rows ``-H(sigma~ - sigma) (K_-, K_+)`` and
    ``H(sigma - sigma~) (-I_-, I_+)``.

    Raises
    ------
    DiagonalError
        When ``sigma == sigma~`` (the kernel jumps there).
    DomainError
        For nonpositive arguments or ``eta == 0``.
    """
    if sigma <= 0 or sigma_t <= 0:
        raise DomainError("Green's matrix arguments must be positive")
    if params.eta <= 0:
        raise DomainError("Green's matrix needs eta > 0")
    if sigma == sigma_t:
        raise DiagonalError("Green's matrix is discontinuous on the diagonal sigma == sigma~")
    col_i, col_k, row_k, row_i = _kernel_factors(params, np.array([sigma, sigma_t]))
    pref = math.sqrt(sigma * sigma_t) * params.eta
    if sigma < sigma_t:
        # exp(eta sigma) from I times exp(-eta sigma~) from K
        return pref * math.exp(params.eta * (sigma - sigma_t)) * np.outer(col_i[:, 0], row_k[:, 1])
    return pref * math.exp(params.eta * (sigma_t - sigma)) * np.outer(col_k[:, 0], row_i[:, 1])


def _check_support(rhs: Vector2Field):
    sup = rhs.sup_norm()
    ends = max(abs(rhs.a[0]), abs(rhs.a[-1]), abs(rhs.b[0]), abs(rhs.b[-1]))
    if ends > SUPPORT_RTOL * sup:
        raise SupportError(
            f"rhs is not compactly supported in the grid: end values {ends:.3e} vs sup {sup:.3e}"
        )


def greens_apply(
    params: ModelParams,
    rhs: Vector2Field,
    grid: RadialGrid,
    sigma_eval=None,
    convention: SwapConvention = RIGHT_INVERSE_CONVENTION,
) -> Vector2Field:
    """Apply the Green's operator ``Q`` to a compactly supported right-hand side.

    ``Q(a, b)(sigma) = sigma^{-f/2} int_0^inf M(sigma, s) s^{f/2 - 1} g(s) ds`` with
    ``g`` the swapped data selected by ``convention``. The kernel factorizes
    on each side of the diagonal, so both pieces reduce to cumulative
    composite-Simpson integrals on the grid (never touching the diagonal).

    ``sigma_eval`` defaults to the grid nodes; other points inside the grid are
    served by spline interpolation of the cumulative integrals.
    """
    _check_grid(rhs, grid)
    if params.eta <= 0:
        raise DomainError("Green's operator needs eta > 0")
    _check_support(rhs)
    s = grid.nodes
    eta = params.eta
    if eta * (s[-1] - s[0]) > MAX_EXPONENT_SPAN:
        raise DomainError("eta times the grid span is too large for the scaled kernel")
    ga, gb = convention.apply(rhs.a, rhs.b)
    col_i, col_k, row_k, row_i = _kernel_factors(params, s)
    centre = 0.5 * (s[0] + s[-1])
    weight = s ** (0.5 * params.f - 0.5)

    # tail integral int_sigma^inf e^{-eta(s - c)} Ktilde-row . g ds, summed from the top
    wk = weight * np.exp(-eta * (s - centre)) * (row_k[0] * ga + row_k[1] * gb)
    tail = cumulative_simpson(wk[::-1], x=-s[::-1], initial=0.0)[::-1]
    # head integral int_0^sigma e^{eta(s - c)} Itilde-row . g ds
    wi = weight * np.exp(eta * (s - centre)) * (row_i[0] * ga + row_i[1] * gb)
    head = cumulative_simpson(wi, x=s, initial=0.0)

    if sigma_eval is None:
        x = s
        ci, ck = col_i, col_k
    else:
        x = np.asarray(sigma_eval, dtype=float)
        if np.any(x < s[0]) or np.any(x > s[-1]):
            raise DomainError("evaluation points must lie inside the grid")
        # interpolate the exponentially rescaled integrals, which are smooth
        tail = CubicSpline(s, tail * np.exp(eta * (s - centre)))(x) * np.exp(-eta * (x - centre))
        head = CubicSpline(s, head * np.exp(-eta * (s - centre)))(x) * np.exp(eta * (x - centre))
        ci, ck = _kernel_factors(params, x)[:2]
    pref = x ** (0.5 - 0.5 * params.f) * eta
    ua = pref * (ci[0] * np.exp(eta * (x - centre)) * tail + ck[0] * np.exp(-eta * (x - centre)) * head)
    ub = pref * (ci[1] * np.exp(eta * (x - centre)) * tail + ck[1] * np.exp(-eta * (x - centre)) * head)
    return Vector2Field(ua, ub)


@dataclass(frozen=True)
class GreensVerification:
    """Outcome of :func:`verify_right_inverse`.

    ``residuals`` maps each convention to the sup-norm residual on the coarse
    and the refined grid; ``orders`` holds the empirical convergence orders.
    """

    residual_sup: float
    convergence_order: float
    chosen_sign_convention: Optional[SwapConvention]
    residuals: dict
    orders: dict
    window: tuple
    tol: float

    @property
    def passed(self) -> bool:
        return (
            self.chosen_sign_convention is not None
            and self.residual_sup <= self.tol
            and self.convergence_order >= 1.0
        )

    def to_dict(self) -> dict:
        return {
            "residual_sup": self.residual_sup,
            "convergence_order": self.convergence_order,
            "chosen_sign_convention": None
            if self.chosen_sign_convention is None
            else self.chosen_sign_convention.value,
            "residuals": {k.value: list(v) for k, v in self.residuals.items()},
            "orders": {k.value: v for k, v in self.orders.items()},
            "window": list(self.window),
            "tol": self.tol,
            "passed": self.passed,
        }


def right_inverse_residual(
    params: ModelParams,
    rhs: Vector2Field,
    grid: RadialGrid,
    convention: SwapConvention,
    window=(0.1, 5.0),
) -> float:
    """``sup |L(Q rhs) - rhs|`` over grid nodes inside ``window``."""
    u = greens_apply(params, rhs, grid, convention=convention)
    res = full_operator_apply(params, u, grid) - rhs
    mask = (grid.nodes >= window[0]) & (grid.nodes <= window[1])
    if not np.any(mask):
        raise DomainError("residual window contains no grid nodes")
    return float(max(np.max(np.abs(res.a[mask])), np.max(np.abs(res.b[mask]))))


def verify_right_inverse(
    params: ModelParams,
    rhs: Vector2Field,
    grid: RadialGrid,
    window=(0.1, 5.0),
    tol: float = 1e-4,
    raise_on_failure: bool = True,
) -> GreensVerification:
    """Check ``L Q = id`` numerically for both swap conventions.

    The residual is computed on ``grid`` and on its refinement; a convention
    is accepted when its residual decays at empirical order >= 1. The best
    accepted convention is reported.

    Raises
    ------
    NoConventionConverges
        If neither convention converges (unless ``raise_on_failure`` is false,
        in which case the report carries ``chosen_sign_convention=None``).
    """
    fine = grid.refined()
    rhs_fine = rhs.on(fine, grid)
    residuals, orders = {}, {}
    for conv in SwapConvention:
        coarse = right_inverse_residual(params, rhs, grid, conv, window)
        refined = right_inverse_residual(params, rhs_fine, fine, conv, window)
        residuals[conv] = (coarse, refined)
        if refined == 0.0:
            orders[conv] = math.inf
        elif coarse == 0.0:
            orders[conv] = 0.0
        else:
            orders[conv] = math.log2(coarse / refined)
    accepted = [c for c in SwapConvention if orders[c] >= 1.0]
    if accepted:
        best = min(accepted, key=lambda c: residuals[c][1])
        report = GreensVerification(
            residuals[best][1], orders[best], best, residuals, orders, tuple(window), tol
        )
    else:
        best = min(SwapConvention, key=lambda c: residuals[c][1])
        report = GreensVerification(
            residuals[best][1], orders[best], None, residuals, orders, tuple(window), tol
        )
        if raise_on_failure:
            raise NoConventionConverges(
                "no swap convention makes L Q converge to the identity: "
                + ", ".join(f"{c.value}: res={residuals[c]}, order={orders[c]:.2f}" for c in SwapConvention)
            )
    return report


def gaussian_rhs(centre: float = 1.0, width: float = 0.1, b_weight: float = -0.5):
    """A smooth compactly supported test datum ``(G, b_weight * G)``."""

    def fn(s):
        g = np.exp(-0.5 * ((np.asarray(s, dtype=float) - centre) / width) ** 2)
        return g, b_weight * g

    return fn



def k_solution_excluded(mu: float, f: int, delta: float) -> bool:
    """Whether the small-``sigma`` K-solution lies outside ``sigma^delta L^2(sigma^f dsigma)``.

    Its dominant component behaves like ``sigma^{-f/2 + 1/2 - (|mu| + 1/2)}``,
    which is square integrable near 0 against ``sigma^{f - 2 delta}`` iff
    ``2(e - delta) + f > -1`` for that exponent ``e``.
    """
    e = -0.5 * f + 0.5 - (abs(mu) + 0.5)
    return 2 * (e - delta) + f <= -1
