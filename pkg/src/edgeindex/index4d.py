"""Closed-form index, signature and eta-limit formulas for a 4-manifold with a cone edge.

``X`` is a closed spin 4-manifold, ``Y`` an embedded surface with
self-intersection ``q = [Y]^2`` and the metric has cone angle ``2 pi beta``
along ``Y``. All topological quantities are exact rationals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from edgeindex.errors import DomainError, IdentityViolation
from edgeindex.forms import ahat_degree4, circle_fiber_transgression
from edgeindex.witt import as_fraction


def _as_int(q) -> int:
    if isinstance(q, bool) or int(q) != q:
        raise DomainError(f"self-intersection must be an integer, got {q!r}")
    return int(q)


@dataclass(frozen=True)
class EdgeData4D:
    """``(int p1, [Y]^2, beta)``; ``beta`` must lie in ``(0, 1]`` unless exploring."""

    p1_integral: Fraction
    self_intersection: int
    beta: Fraction
    allow_large_beta: bool = False

    def __post_init__(self):
        object.__setattr__(self, "p1_integral", as_fraction(self.p1_integral))
        object.__setattr__(self, "self_intersection", _as_int(self.self_intersection))
        beta = as_fraction(self.beta)
        object.__setattr__(self, "beta", beta)
        if beta <= 0:
            raise DomainError("beta must be positive")
        if beta > 1 and not self.allow_large_beta:
            raise DomainError("beta > 1 breaks the spectral gap of the circle links")

    @classmethod
    def exploratory(cls, p1_integral, self_intersection, beta) -> "EdgeData4D":
        return cls(p1_integral, self_intersection, beta, allow_large_beta=True)


@dataclass(frozen=True)
class SignatureData4D:
    weyl_integral: float
    self_intersection: int
    beta: Fraction

    def __post_init__(self):
        object.__setattr__(self, "self_intersection", _as_int(self.self_intersection))
        beta = as_fraction(self.beta)
        if beta <= 0:
            raise DomainError("beta must be positive")
        object.__setattr__(self, "beta", beta)


@dataclass(frozen=True)
class IndexResult:
    value: Fraction

    @property
    def integer(self) -> bool:
        return self.value.denominator == 1

    @property
    def non_integer(self) -> bool:
        """Advisory: a non-integral value means the input data is not geometric."""
        return not self.integer


def dirac_index_4d(data: EdgeData4D) -> IndexResult:
    """``-(1/24) int p1 + (1/24)(beta^2 - 1) [Y]^2``."""
    q = data.self_intersection
    return IndexResult(-data.p1_integral / 24 + (data.beta**2 - 1) * q / 24)


def signature_correction(self_intersection: int, beta) -> Fraction:
    """Topological term ``(1 - beta^2) [Y]^2 / 3`` of the signature formula."""
    beta = as_fraction(beta)
    return (1 - beta**2) * _as_int(self_intersection) / 3


def signature_4d(data: SignatureData4D) -> float:
    """``(1 / 12 pi^2) int (|W+|^2 - |W-|^2) + (1 - beta^2) [Y]^2 / 3``."""
    return data.weyl_integral / (12 * math.pi**2) + float(
        signature_correction(data.self_intersection, data.beta)
    )


def adiabatic_eta_limit(self_intersection: int) -> Fraction:
    """Limit of half the eta invariant of the collapsing circle bundle, ``[Y]^2 / 24``."""
    return Fraction(_as_int(self_intersection), 24)


@dataclass(frozen=True)
class ApsConsistencyReport:
    transgression: Fraction
    boundary_term: Fraction
    eta_limit: Fraction
    disc_bundle_residual: Fraction
    assembled_index: Fraction
    formula_index: Fraction
    jump: Fraction
    expected_jump: Fraction

    @property
    def holds(self) -> bool:
        return (
            self.disc_bundle_residual == 0
            and self.assembled_index == self.formula_index
            and self.jump == self.expected_jump
        )


def aps_consistency_check(data: EdgeData4D) -> ApsConsistencyReport:
    """Cross-check the boundary contributions against the closed-form index.

    * Disc bundle (smooth, ``beta = 1``, vanishing interior term): the
      A-hat-weighted transgression ``ahat(-q)`` minus the eta limit is zero.
    * Cone angle ``beta``: interior term + ``ahat(-beta^2 q)`` - eta limit
      reproduces :func:`dirac_index_4d`.
    * The jump ``ind(beta) - ind(1)`` equals ``(beta^2 - 1) q / 24``.

    Raises
    ------
    IdentityViolation
        If any identity fails (inconsistent constants between modules).
    """
    q = data.self_intersection
    trans = circle_fiber_transgression(data.beta, q)
    boundary = ahat_degree4(trans)
    eta = adiabatic_eta_limit(q)
    disc = ahat_degree4(0) + ahat_degree4(circle_fiber_transgression(1, q)) - eta
    assembled = ahat_degree4(data.p1_integral) + boundary - eta
    formula = dirac_index_4d(data).value
    smooth = dirac_index_4d(EdgeData4D(data.p1_integral, q, 1)).value
    report = ApsConsistencyReport(
        transgression=trans,
        boundary_term=boundary,
        eta_limit=eta,
        disc_bundle_residual=disc,
        assembled_index=assembled,
        formula_index=formula,
        jump=formula - smooth,
        expected_jump=(data.beta**2 - 1) * q / 24,
    )
    if not report.holds:
        raise IdentityViolation(f"boundary bookkeeping is inconsistent: {report}")
    return report
