"""Slow high-precision Bessel references: power series for I, cosh-integral quadrature for K."""

from __future__ import annotations

import mpmath as mp


def series_i(nu, z, dps=50):
    """``I_nu(z) = sum (z/2)^(2k+nu) / (k! Gamma(k+nu+1))`` summed until terms stall."""
    with mp.workdps(dps):
        nu, z = mp.mpf(nu), mp.mpf(z)
        half = z / 2
        term = half**nu / mp.gamma(nu + 1)
        total = term
        k = 0
        while abs(term) > mp.eps * abs(total):
            k += 1
            term *= half**2 / (k * (k + nu))
            total += term
        return total


def quad_k(nu, z, dps=30):
    """``K_nu(z) = int_0^inf exp(-z cosh t) cosh(nu t) dt``, cut where the integrand is below e^-120 of its peak."""
    with mp.workdps(dps):
        nu, z = mp.mpf(nu), mp.mpf(z)
        peak = mp.asinh(nu / z)

        def log_integrand(t):
            return -z * mp.cosh(t) + nu * t

        top = peak + 1
        while log_integrand(peak) - log_integrand(top) < 120:
            top += 1
        nodes = mp.linspace(0, top, int(top) * 2 + 2)
        return mp.quad(lambda t: mp.exp(-z * mp.cosh(t)) * mp.cosh(nu * t), nodes)
