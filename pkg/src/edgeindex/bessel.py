r"""Modified Bessel functions :math:`I_\nu`, :math:`K_\nu` of real order and positive argument.

Everything downstream (Green's kernels, projector symbols, inequality sweeps)
is built on the exponentially scaled pair

.. math::
    \tilde I_\nu(z) = e^{-z} I_\nu(z), \qquad \tilde K_\nu(z) = e^{z} K_\nu(z),

whose products and ratios never overflow. The evaluators are vectorized over
NumPy arrays and broadcast ``nu`` against ``z``.

Evaluation regions for :math:`I_\nu` (per element):

* ascending power series for ``z <= max(10, 2 nu)``;
* Hankel large-argument expansion for ``z >= max(50, 4 nu**2)``;
* otherwise the continued fraction for :math:`I_{\nu+1}/I_\nu` closed by the
  Wronskian :math:`I_\nu K_{\nu+1} + I_{\nu+1} K_\nu = 1/z`.

:math:`K_\nu` is obtained at a reduced order :math:`|\mu| \le 1/2` from Temme's
series (``z < 2``) or Steed's continued fraction (``z >= 2``) and carried to
order :math:`\nu` by forward recurrence, which is stable for :math:`K`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, zeta

from edgeindex.errors import DomainError, OverflowScaled

EPS = float(np.finfo(float).eps)
EULER_GAMMA = 0.57721566490153286061

DEFAULT_TOL = 1e-12
OVERFLOW_GUARD = 700.0
SERIES_MIN_SWITCH = 10.0
SERIES_ORDER_FACTOR = 2.0
HANKEL_MIN_SWITCH = 50.0
TEMME_SWITCH = 2.0
MAX_ITER = 20000

# Known limits at the excluded point z = 0; documentation only, never returned.
LIMITS_AT_ZERO = {
    "I_0(0)": 1.0,
    "I_nu(0), nu > 0": 0.0,
    "K_nu(0)": math.inf,
    "z*I_nu(z)*K_nu(z) as z->0, nu > 0": 0.0,
    "z*(I_nu K_{nu+1} + I_{nu+1} K_nu)": 1.0,
}
LIMITS_AT_INFINITY = {
    "z*I_nu(z)*K_nu(z) as z->inf": 0.5,
    "I_nu(z)*sqrt(2*pi*z)*exp(-z) as z->inf": 1.0,
    "K_nu(z)*sqrt(2*z/pi)*exp(z) as z->inf": 1.0,
}

# zeta(2j+1)/(2j+1), j >= 1: odd part of log Gamma(1 + mu)
_ZETA_ODD = np.array([zeta(2 * j + 1) / (2 * j + 1) for j in range(1, 41)])


@dataclass(frozen=True)
class BesselPoint:
    """Order ``nu >= 0`` and argument ``z > 0``."""

    nu: float
    z: float

    def __post_init__(self):
        if not (math.isfinite(self.nu) and self.nu >= 0):
            raise DomainError(f"order must be finite and >= 0, got {self.nu!r}")
        if not (math.isfinite(self.z) and self.z > 0):
            raise DomainError(f"argument must be finite and > 0, got {self.z!r}")


@dataclass(frozen=True)
class BesselPair:
    """Evaluated ``(I_nu(z), K_nu(z))``.

    When ``scaled`` is true the values are ``exp(-z) I_nu`` and ``exp(z) K_nu``.
    ``est_rel_err`` is a heuristic rounding-error estimate, not a rigorous bound.
    """

    i_val: float
    k_val: float
    est_rel_err: float
    scaled: bool = False
    tol: float = DEFAULT_TOL

    @property
    def degraded(self) -> bool:
        return self.est_rel_err > self.tol


def _prepare(nu, z):
    nu_arr = np.asarray(nu, dtype=float)
    z_arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(nu_arr)) or np.any(nu_arr < 0):
        raise DomainError("order must be finite and >= 0")
    if not np.all(np.isfinite(z_arr)) or np.any(z_arr <= 0):
        raise DomainError("argument must be finite and > 0 (z = 0 is excluded)")
    scalar = nu_arr.ndim == 0 and z_arr.ndim == 0
    nu_b, z_b = np.broadcast_arrays(nu_arr, z_arr)
    return np.array(nu_b, dtype=float), np.array(z_b, dtype=float), scalar


def _out(arr, scalar):
    return float(arr) if scalar else arr


def _sinhc(x):
    small = np.abs(x) < 1e-4
    safe = np.where(small, 1.0, x)
    return np.where(small, 1.0 + x * x / 6.0, np.sinh(safe) / safe)


def _sinpi(x):
    """sin(pi x) with exact zeros at the integers."""
    r = x - 2.0 * np.round(0.5 * x)
    return np.where(r == np.round(r), 0.0, np.sin(np.pi * r))


# ---------------------------------------------------------------------------
# I_nu
# ---------------------------------------------------------------------------


def _ive_series(nu, z):
    """Scaled ascending series; returns (values, term counts)."""
    q = 0.25 * z * z
    term = np.ones_like(z)
    total = np.ones_like(z)
    nterms = np.zeros(z.shape, dtype=int)
    active = np.ones(z.shape, dtype=bool)
    k = 0
    while np.any(active) and k < MAX_ITER:
        k += 1
        term = np.where(active, term * q / (k * (nu + k)), term)
        total = np.where(active, total + term, total)
        nterms = np.where(active, k, nterms)
        # terms grow while k(nu+k) < q; stop only once they shrink
        active &= ~((term < EPS * total) & (k * (nu + k) > q))
    logpref = nu * np.log(0.5 * z) - gammaln(nu + 1.0) - z
    return np.exp(logpref) * total, nterms + np.abs(logpref)


def _ive_hankel(nu, z):
    m = 4.0 * nu * nu
    term = np.ones_like(z)
    total = np.ones_like(z)
    active = np.ones(z.shape, dtype=bool)
    k = 0
    while np.any(active) and k < 200:
        k += 1
        term = np.where(active, -term * (m - (2 * k - 1) ** 2) / (8.0 * k * z), term)
        total = np.where(active, total + term, total)
        active &= np.abs(term) >= EPS * np.abs(total)
    return total / np.sqrt(2.0 * np.pi * z), np.full(z.shape, float(k))


def _i_ratio_cf1(nu, z):
    """I_{nu+1}(z) / I_nu(z) by modified Lentz on the three-term recurrence."""
    tiny = 1e-300
    f = 2.0 * (nu + 1.0) / z
    c = f.copy()
    d = np.zeros_like(z)
    active = np.ones(z.shape, dtype=bool)
    k = 1
    while np.any(active) and k < MAX_ITER:
        k += 1
        b = 2.0 * (nu + k) / z
        d = b + d
        d = np.where(d == 0, tiny, d)
        c = b + 1.0 / c
        c = np.where(c == 0, tiny, c)
        d = 1.0 / d
        delta = c * d
        f = np.where(active, f * delta, f)
        active &= np.abs(delta - 1.0) >= EPS
    return 1.0 / f, float(k)


def _ive_core(nu, z):
    """Scaled I_nu for nu >= 0; returns (values, error-estimate weights)."""
    out = np.empty_like(z)
    weight = np.empty_like(z)
    series = z <= np.maximum(SERIES_MIN_SWITCH, SERIES_ORDER_FACTOR * nu)
    hankel = ~series & (z >= np.maximum(HANKEL_MIN_SWITCH, 4.0 * nu * nu))
    ratio = ~series & ~hankel
    if np.any(series):
        out[series], weight[series] = _ive_series(nu[series], z[series])
    if np.any(hankel):
        out[hankel], weight[hankel] = _ive_hankel(nu[hankel], z[hankel])
    if np.any(ratio):
        n, x = nu[ratio], z[ratio]
        r, iters = _i_ratio_cf1(n, x)
        k0, k1, kw = _kve_pair_core(n, x)
        out[ratio] = 1.0 / (x * (k1 + r * k0))
        weight[ratio] = iters + kw
    return out, weight


# ---------------------------------------------------------------------------
# K_nu
# ---------------------------------------------------------------------------


def _temme_gammas(mu):
    """1/Gamma(1 +- mu) and Temme's gamma_1, gamma_2 for |mu| <= 1/2.

    Built from the odd part of log Gamma(1 + mu) (a zeta series) and the
    reflection formula, so gamma_1 stays accurate as mu -> 0.
    """
    mu2 = mu * mu
    s = np.full_like(mu, EULER_GAMMA)
    p = np.ones_like(mu)
    for c in _ZETA_ODD:
        p = p * mu2
        s = s + c * p
    odd = -mu * s
    root = np.sqrt(np.sinc(mu))
    gam1 = -root * _sinhc(odd) * s
    gam2 = root * np.cosh(odd)
    return gam1, gam2, root * np.exp(-odd), root * np.exp(odd)


def _k_temme(mu, x):
    """K_mu, K_{mu+1} for |mu| <= 1/2 and 0 < x < 2 (unscaled)."""
    gam1, gam2, gampl, gammi = _temme_gammas(mu)
    mu2 = mu * mu
    x2 = 0.5 * x
    fact = 1.0 / np.sinc(mu)
    d = -np.log(x2)
    e = mu * d
    ff = fact * (gam1 * np.cosh(e) + gam2 * _sinhc(e) * d)
    total = ff.copy()
    ee = np.exp(e)
    p = 0.5 * ee / gampl
    q = 0.5 / (ee * gammi)
    c = np.ones_like(x)
    dd = x2 * x2
    total1 = p.copy()
    i = 0
    while i < MAX_ITER:
        i += 1
        ff = (i * ff + p + q) / (i * i - mu2)
        c = c * dd / i
        p = p / (i - mu)
        q = q / (i + mu)
        delta = c * ff
        total = total + delta
        total1 = total1 + c * (p - i * ff)
        if np.all(np.abs(delta) < EPS * np.abs(total)):
            break
    return total, total1 * 2.0 / x, float(i)


def _k_steed(mu, x):
    """Scaled K_mu, K_{mu+1} for |mu| <= 1/2 and x >= 2 (Steed's CF2)."""
    mu2 = mu * mu
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(x)
    q2 = np.ones_like(x)
    a1 = 0.25 - mu2
    q = a1.copy()
    c = a1.copy()
    a = -a1
    s = 1.0 + q * delh
    i = 1
    while i < MAX_ITER:
        i += 1
        a = a - 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h = h + delh
        dels = q * delh
        s = s + dels
        if np.all(np.abs(dels / s) < EPS):
            break
    h = a1 * h
    k0 = np.sqrt(np.pi / (2.0 * x)) / s
    k1 = k0 * (mu + x + 0.5 - h) / x
    return k0, k1, float(i)


def _kve_pair_core(nu, z):
    """Scaled (K_nu, K_{nu+1}) for nu >= 0 plus error-estimate weights."""
    nl = np.floor(nu + 0.5).astype(int)
    mu = nu - nl
    k0 = np.empty_like(z)
    k1 = np.empty_like(z)
    weight = np.empty_like(z)
    small = z < TEMME_SWITCH
    if np.any(small):
        a, b, it = _k_temme(mu[small], z[small])
        scale = np.exp(z[small])
        k0[small], k1[small], weight[small] = a * scale, b * scale, it
    if np.any(~small):
        a, b, it = _k_steed(mu[~small], z[~small])
        k0[~small], k1[~small], weight[~small] = a, b, it
    top = int(nl.max()) if nl.size else 0
    for i in range(1, top + 1):
        step = i <= nl
        nxt = (mu + i) * (2.0 / z) * k1 + k0
        k0 = np.where(step, k1, k0)
        k1 = np.where(step, nxt, k1)
    return k0, k1, weight + nl


# ---------------------------------------------------------------------------
# public evaluators
# ---------------------------------------------------------------------------


def ive(nu, z):
    """Exponentially scaled ``exp(-z) I_nu(z)``."""
    nu, z, scalar = _prepare(nu, z)
    return _out(_ive_core(nu, z)[0], scalar)


def kve(nu, z):
    """Exponentially scaled ``exp(z) K_nu(z)``."""
    nu, z, scalar = _prepare(nu, z)
    return _out(_kve_pair_core(nu, z)[0], scalar)


def _ive_signed(order, z):
    """Scaled I of any real order, via I_{-v} = I_v + (2/pi) sin(v pi) K_v."""
    a = np.abs(order)
    val = _ive_core(a, z)[0]
    neg = order < 0
    if np.any(neg):
        kv = _kve_pair_core(a, z)[0]
        val = np.where(neg, val + (2.0 / np.pi) * _sinpi(a) * kv * np.exp(-2.0 * z), val)
    return val


def _kve_signed(order, z):
    return _kve_pair_core(np.abs(order), z)[0]


def _unscale(scaled_vals, z, sign, scaled, scalar, name):
    if scaled:
        return _out(scaled_vals, scalar)
    if np.any(z > OVERFLOW_GUARD):
        warnings.warn(
            f"{name}: argument beyond {OVERFLOW_GUARD}; returning exponentially scaled values",
            OverflowScaled,
            stacklevel=3,
        )
        return _out(scaled_vals, scalar)
    return _out(scaled_vals * np.exp(sign * z), scalar)


def bessel_i(nu, z, scaled=False):
    """Modified Bessel function of the first kind ``I_nu(z)``.

    Parameters
    ----------
    nu : float or array_like
        Order, ``nu >= 0``.
    z : float or array_like
        Argument, ``z > 0``.
    scaled : bool
        Return ``exp(-z) I_nu(z)`` instead. Scaling is also engaged (with an
        :class:`OverflowScaled` warning) when any ``z`` exceeds
        ``OVERFLOW_GUARD``.

    Raises
    ------
    DomainError
        If ``nu < 0`` or ``z <= 0``.
    """
    nu, z, scalar = _prepare(nu, z)
    return _unscale(_ive_core(nu, z)[0], z, 1.0, scaled, scalar, "bessel_i")


def bessel_k(nu, z, scaled=False):
    """Modified Bessel function of the second kind ``K_nu(z)``; see :func:`bessel_i`."""
    nu, z, scalar = _prepare(nu, z)
    return _unscale(_kve_pair_core(nu, z)[0], z, -1.0, scaled, scalar, "bessel_k")


def i_prime_forms(nu, z, scaled=False):
    """Both recurrence right-hand sides for ``I_nu'(z)``.

    Returns ``(I_{nu-1} - (nu/z) I_nu, (nu/z) I_nu + I_{nu+1})``.
    """
    nu, z, scalar = _prepare(nu, z)
    i0 = _ive_core(nu, z)[0]
    lower = _ive_signed(nu - 1.0, z) - nu / z * i0
    upper = nu / z * i0 + _ive_core(nu + 1.0, z)[0]
    return (
        _unscale(lower, z, 1.0, scaled, scalar, "i_prime_forms"),
        _unscale(upper, z, 1.0, scaled, scalar, "i_prime_forms"),
    )


def k_prime_forms(nu, z, scaled=False):
    """Both recurrence right-hand sides for ``K_nu'(z)``.

    Returns ``(-K_{nu-1} - (nu/z) K_nu, (nu/z) K_nu - K_{nu+1})``.
    """
    nu, z, scalar = _prepare(nu, z)
    k0, k1, _ = _kve_pair_core(nu, z)
    lower = -_kve_signed(nu - 1.0, z) - nu / z * k0
    upper = nu / z * k0 - k1
    return (
        _unscale(lower, z, -1.0, scaled, scalar, "k_prime_forms"),
        _unscale(upper, z, -1.0, scaled, scalar, "k_prime_forms"),
    )


def bessel_i_prime(nu, z, scaled=False):
    """``I_nu'(z)`` from the recurrence ``(nu/z) I_nu + I_{nu+1}`` (never by differencing)."""
    return i_prime_forms(nu, z, scaled)[1]


def bessel_k_prime(nu, z, scaled=False):
    """``K_nu'(z)`` from the recurrence ``-K_{nu-1} - (nu/z) K_nu``."""
    return k_prime_forms(nu, z, scaled)[0]


def wronskian_residual(nu, z):
    """``z (I_nu K_{nu+1} + I_{nu+1} K_nu) - 1``, which vanishes identically."""
    nu, z, scalar = _prepare(nu, z)
    i0 = _ive_core(nu, z)[0]
    i1 = _ive_core(nu + 1.0, z)[0]
    k0, k1, _ = _kve_pair_core(nu, z)
    return _out(z * (i0 * k1 + i1 * k0) - 1.0, scalar)


def scaled_product(nu, z):
    """``z I_nu(z) K_nu(z)``, formed from scaled factors (no overflow)."""
    nu, z, scalar = _prepare(nu, z)
    return _out(z * _ive_core(nu, z)[0] * _kve_pair_core(nu, z)[0], scalar)


def i_ratio(nu, z):
    """``I_{nu+1}(z) / I_nu(z)``."""
    nu, z, scalar = _prepare(nu, z)
    return _out(_ive_core(nu + 1.0, z)[0] / _ive_core(nu, z)[0], scalar)


def k_ratio(nu, z):
    """``K_{nu+1}(z) / K_nu(z)``."""
    nu, z, scalar = _prepare(nu, z)
    k0, k1, _ = _kve_pair_core(nu, z)
    return _out(k1 / k0, scalar)


def log_derivative_i(nu, z):
    """``z I_nu'(z) / I_nu(z) = nu + z I_{nu+1}/I_nu``."""
    return np.asarray(nu, dtype=float) + np.asarray(z, dtype=float) * i_ratio(nu, z)


def log_derivative_k(nu, z):
    """``z K_nu'(z) / K_nu(z) = nu - z K_{nu+1}/K_nu``."""
    return np.asarray(nu, dtype=float) - np.asarray(z, dtype=float) * k_ratio(nu, z)


def bessel_pair(point: BesselPoint, tol: float = DEFAULT_TOL) -> BesselPair:
    """Evaluate ``(I_nu, K_nu)`` at ``point`` with a rounding-error estimate.

    Values are exponentially scaled (and ``scaled`` set) beyond ``OVERFLOW_GUARD``.
    """
    nu, z, _ = _prepare(point.nu, point.z)
    i_s, iw = _ive_core(nu, z)
    k_s, _, kw = _kve_pair_core(nu, z)
    est = float(EPS * (8.0 + max(float(iw), float(kw))))
    if point.z > OVERFLOW_GUARD:
        return BesselPair(float(i_s), float(k_s), est, scaled=True, tol=tol)
    return BesselPair(
        float(i_s * math.exp(point.z)), float(k_s * math.exp(-point.z)), est, tol=tol
    )
