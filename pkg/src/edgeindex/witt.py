"""Spectral gap of the fiber Dirac operator and the indicial roots it controls.

The Witt condition asks that no fiber eigenvalue lies in the open interval
``(-1/2, 1/2)``. For a circle link of length ``2 pi beta`` the Dirac spectrum
is ``(k + 1/2) / beta`` (spin structure bounding the disk) or ``k / beta``,
so the condition holds exactly when ``beta <= 1`` in the first case.

Arithmetic is exact: eigenvalues, ``beta`` and margins are ``Fraction``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Optional, Union

from edgeindex.errors import DomainError, EmptySpectrum, TruncationError

HALF = Fraction(1, 2)

Number = Union[int, float, Fraction]


class Spin(str, enum.Enum):
    NONTRIVIAL = "nontrivial"  # extends over the disk, half-integer modes
    TRIVIAL = "trivial"


def as_fraction(x) -> Fraction:
    """Exact rational from an int, Fraction, decimal string or float."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"not a rational number: {x!r}") from exc
    if isinstance(x, float):
        if not math.isfinite(x):
            raise DomainError(f"not a finite number: {x!r}")
        return Fraction(x)
    raise DomainError(f"unsupported number type {type(x).__name__}")


@dataclass(frozen=True)
class FiberSpectrum:
    """Eigenvalues of a fiber Dirac operator.

    ``eigenvalues`` is the sorted multiset known explicitly; ``cutoff`` (when
    set) is the radius below which that list is complete. A circle generator
    additionally records ``beta`` and ``spin`` so gap questions are answered
    in closed form.
    """

    eigenvalues: tuple
    cutoff: Optional[Fraction] = None
    beta: Optional[Fraction] = None
    spin: Optional[Spin] = None

    def __post_init__(self):
        vals = tuple(sorted(as_fraction(v) for v in self.eigenvalues))
        object.__setattr__(self, "eigenvalues", vals)
        if self.cutoff is not None:
            object.__setattr__(self, "cutoff", as_fraction(self.cutoff))
        if self.beta is not None:
            object.__setattr__(self, "beta", as_fraction(self.beta))

    @classmethod
    def finite(cls, values: Iterable) -> "FiberSpectrum":
        return cls(tuple(values))

    @property
    def is_generator(self) -> bool:
        return self.beta is not None

    @property
    def symmetric(self) -> bool:
        if self.is_generator:
            return True
        return self.eigenvalues == tuple(sorted(-v for v in self.eigenvalues))

    def contains(self, lam: Number) -> bool:
        """Exact membership; errors beyond the cutoff of a truncated list."""
        lam = as_fraction(lam)
        if self.is_generator:
            x = lam * self.beta
            if self.spin is Spin.NONTRIVIAL:
                x -= HALF
            return x.denominator == 1
        if self.cutoff is not None and abs(lam) > self.cutoff:
            raise TruncationError(f"|{lam}| exceeds the recorded cutoff {self.cutoff}")
        return lam in self.eigenvalues

    def min_abs(self) -> Fraction:
        if self.is_generator:
            return HALF / self.beta if self.spin is Spin.NONTRIVIAL else Fraction(0)
        if not self.eigenvalues:
            raise EmptySpectrum("spectrum has no eigenvalues")
        return min(abs(v) for v in self.eigenvalues)


def circle_spectrum(beta: Number, spin: Spin = Spin.NONTRIVIAL, cutoff: Number = 3) -> FiberSpectrum:
    """Dirac spectrum of a circle of length ``2 pi beta`` within ``[-cutoff, cutoff]``.

    Raises
    ------
    DomainError
        If ``beta <= 0`` or ``cutoff < 0``.
    """
    beta = as_fraction(beta)
    cutoff = as_fraction(cutoff)
    spin = Spin(spin)
    if beta <= 0:
        raise DomainError(f"beta must be positive, got {beta}")
    if cutoff < 0:
        raise DomainError("cutoff must be nonnegative")
    shift = HALF if spin is Spin.NONTRIVIAL else Fraction(0)
    # (k + shift) / beta <= cutoff  <=>  k <= cutoff * beta - shift
    kmax = math.floor(cutoff * beta - shift)
    vals = [(k + shift) / beta for k in range(-kmax - 1, kmax + 1)]
    vals = [v for v in vals if abs(v) <= cutoff]
    return FiberSpectrum(tuple(vals), cutoff, beta, spin)


@dataclass(frozen=True)
class WittResult:
    holds: bool
    margin: Fraction

    def to_dict(self) -> dict:
        return {"holds": self.holds, "margin": str(self.margin)}


def witt_gap_check(spec: FiberSpectrum) -> WittResult:
    """``holds`` iff no eigenvalue has ``|lambda| < 1/2``; ``margin = min|lambda| - 1/2``.

    Eigenvalues exactly at ``+-1/2`` pass with margin 0.
    """
    m = spec.min_abs() - HALF
    return WittResult(m >= 0, m)


@dataclass(frozen=True)
class IndicialRootSet:
    roots: tuple
    spectrum: FiberSpectrum
    witt_consequence: bool

    def to_dict(self) -> dict:
        return {"roots": [str(r) for r in self.roots], "witt_consequence": self.witt_consequence}


def indicial_roots(spec: FiberSpectrum) -> IndicialRootSet:
    """Shifted spectrum ``{lambda + 1/2}``.

    ``witt_consequence`` is true when no root lies in the open interval
    ``(0, 1)``. For a circle generator this is decided in closed form; the
    listed roots come from the truncated eigenvalues.
    """
    if not spec.is_generator and not spec.eigenvalues:
        raise EmptySpectrum("spectrum has no eigenvalues")
    roots = tuple(v + HALF for v in spec.eigenvalues)
    if spec.is_generator:
        # a root in (0, 1) is exactly an eigenvalue in (-1/2, 1/2)
        clear = witt_gap_check(spec).holds
    else:
        clear = not any(0 < r < 1 for r in roots)
    return IndicialRootSet(roots, spec, clear)


def read_spectrum_file(path) -> FiberSpectrum:
    """One decimal eigenvalue per line; blank lines and ``#`` comments skipped."""
    values = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                values.append(as_fraction(line))
    if not values:
        raise EmptySpectrum(f"no eigenvalues in {path}")
    return FiberSpectrum(tuple(values))


def _exact_if_rational(num, *others):
    """``num`` as a Fraction when every operand is rational, so ``/`` stays exact."""
    if all(isinstance(v, Rational) for v in (num, *others)):
        return Fraction(num)
    return num


def cone_scalar_curvature(r_z: Number, dim_z: int, x: Number):
    """Scalar curvature ``(R_Z - d(d - 1)) / x^2`` of the cone over a ``d``-manifold."""
    if dim_z < 1:
        raise DomainError("fiber dimension must be >= 1")
    if x <= 0:
        raise DomainError("x must be positive")
    return _exact_if_rational(r_z - dim_z * (dim_z - 1), x) / x**2


@dataclass(frozen=True)
class PscWittNote:
    witt_implied: bool
    note: str


def psc_witt_note(r_z_nonnegative: bool) -> PscWittNote:
    """Record whether nonnegative fiber scalar curvature forces the Witt condition.

    Nonnegative scalar curvature on the links is known to imply the gap; a
    negative value gives no conclusion either way. No spectrum is computed.
    """
    if r_z_nonnegative:
        return PscWittNote(True, "nonnegative link scalar curvature implies the spectral gap")
    return PscWittNote(False, "no conclusion: the gap must be checked spectrally")


def psc_leading_scalar(delta: Number, scal_h: Number):
    """Leading scalar curvature ``scal_h + 2 / delta^2`` of the ``delta sin(x / delta)`` profile.

    The ``O(eps / delta)`` remainder is not modelled.
    """
    if delta <= 0:
        raise DomainError("delta must be positive")
    return scal_h + _exact_if_rational(2, delta) / delta**2


def psc_delta_threshold(scal_h: float) -> float:
    """Supremum of ``delta`` with ``scal_h + 2 / delta^2 > 0`` (inf when ``scal_h >= 0``)."""
    if scal_h >= 0:
        return math.inf
    return math.sqrt(-2.0 / scal_h)
