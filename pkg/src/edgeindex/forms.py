"""Exact graded exterior algebra for characteristic-form bookkeeping.

Coefficients are :class:`Scalar` values, Laurent polynomials in two formal
symbols ``beta`` (a cone-angle parameter) and ``tau`` (standing for ``2 pi``)
with ``Fraction`` coefficients, so every topological number comes out as an
exact rational once the powers of ``tau`` cancel. Plain floats are also
accepted as coefficients for the numeric cross-check path.

Forms live over a :class:`GeneratorSet`: named generators with a degree and
an exterior derivative. Monomials are kept normal-ordered by registration
index with graded signs, so odd generators square to zero automatically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Mapping, Optional, Sequence

import numpy as np

from edgeindex.errors import (
    DomainError,
    GeneratorClash,
    HypothesisViolated,
    PiResidue,
    QuadratureMismatch,
    ShapeError,
)

QUADRATURE_TOL = 1e-12


class Scalar:
    """Exact Laurent polynomial ``sum c_{a,b} beta^a tau^b`` with rational ``c``."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Optional[Mapping] = None):
        clean = {}
        for (a, b), c in (terms or {}).items():
            c = Fraction(c)
            if c != 0:
                if a < 0:
                    raise DomainError("beta exponents must be nonnegative")
                clean[(int(a), int(b))] = c
        self._terms = clean

    @classmethod
    def const(cls, c) -> "Scalar":
        return cls({(0, 0): c})

    @classmethod
    def monomial(cls, c, beta_power: int = 0, tau_power: int = 0) -> "Scalar":
        return cls({(beta_power, tau_power): c})

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def tau_free(self) -> bool:
        return all(b == 0 for (_, b) in self._terms)

    @staticmethod
    def _coerce(other) -> "Scalar":
        if isinstance(other, Scalar):
            return other
        if isinstance(other, (int, Rational)):
            return Scalar.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, 0) + c
        return Scalar(out)

    __radd__ = __add__

    def __neg__(self):
        return Scalar({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = {}
        for (a1, b1), c1 in self._terms.items():
            for (a2, b2), c2 in other._terms.items():
                k = (a1 + a2, b1 + b2)
                out[k] = out.get(k, 0) + c1 * c2
        return Scalar(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def substitute_beta(self, beta) -> "Scalar":
        """Replace ``beta`` by a rational value."""
        beta = Fraction(beta)
        out = {}
        for (a, b), c in self._terms.items():
            out[(0, b)] = out.get((0, b), 0) + c * beta**a
        return Scalar(out)

    def as_rational(self) -> Fraction:
        """The value of a ``beta``- and ``tau``-free scalar.

        Raises
        ------
        PiResidue
            If a nonzero power of ``tau`` (or ``beta``) survives.
        """
        leftover = [k for k in self._terms if k != (0, 0)]
        if leftover:
            raise PiResidue(f"scalar {self!r} still depends on beta/tau: monomials {sorted(leftover)}")
        return self._terms.get((0, 0), Fraction(0))

    def evaluate(self, beta: float, tau: float = 2 * math.pi) -> float:
        return sum(float(c) * beta**a * tau**b for (a, b), c in self._terms.items())

    def __repr__(self):
        if not self._terms:
            return "Scalar(0)"
        parts = []
        for (a, b), c in sorted(self._terms.items()):
            mono = "".join(
                s for s in (f"*beta^{a}" if a else "", f"*tau^{b}" if b else "")
            )
            parts.append(f"{c}{mono}")
        return "Scalar(" + " + ".join(parts) + ")"


def _is_zero(c) -> bool:
    return c.is_zero() if isinstance(c, Scalar) else c == 0


class GeneratorSet:
    """Registry of named generators, their degrees and their exterior derivatives.

    Generators are ordered by registration; that order fixes the normal form
    of monomials.
    """

    def __init__(self, name: str = "forms"):
        self.name = name
        self._names: list = []
        self._degree: dict = {}
        self._d: dict = {}

    def add(self, name: str, degree: int) -> "FormElement":
        if name in self._degree:
            raise DomainError(f"generator {name!r} already registered")
        if degree < 0:
            raise DomainError("generator degrees must be nonnegative")
        self._degree[name] = int(degree)
        self._names.append(name)
        return self.gen(name)

    def gen(self, name: str) -> "FormElement":
        if name not in self._degree:
            raise DomainError(f"unknown generator {name!r}")
        return FormElement(self, {(self._names.index(name),): Fraction(1)})

    def set_d(self, name: str, image: "FormElement") -> None:
        """Declare ``d(name) = image`` and check ``d^2 = 0`` on it."""
        if image.gens is not self:
            raise GeneratorClash("derivative image uses a different generator set")
        idx = self._names.index(name)
        if not image.is_zero() and image.degree != self._degree[name] + 1:
            raise DomainError(f"d({name}) must have degree {self._degree[name] + 1}")
        self._d[idx] = image
        if not d(image).is_zero():
            del self._d[idx]
            raise DomainError(f"declaring d({name}) this way breaks d^2 = 0")

    def degree_of(self, idx: int) -> int:
        return self._degree[self._names[idx]]

    def name_of(self, idx: int) -> str:
        return self._names[idx]

    def index_of(self, name: str) -> int:
        return self._names.index(name)

    def d_of(self, idx: int) -> "FormElement":
        return self._d.get(idx, FormElement(self, {}))

    def zero(self) -> "FormElement":
        return FormElement(self, {})

    def one(self, coefficient=Fraction(1)) -> "FormElement":
        return FormElement(self, {(): coefficient})


def _normal_order(gens: GeneratorSet, word: Sequence[int]):
    """Sort a word of generator indices; return ``(sign, monomial)`` or ``(0, None)``."""
    w = list(word)
    sign = 1
    # insertion sort, tracking graded transposition signs
    for i in range(1, len(w)):
        j = i
        while j > 0 and w[j - 1] > w[j]:
            if gens.degree_of(w[j - 1]) % 2 and gens.degree_of(w[j]) % 2:
                sign = -sign
            w[j - 1], w[j] = w[j], w[j - 1]
            j -= 1
    for a, b in zip(w, w[1:]):
        if a == b and gens.degree_of(a) % 2:
            return 0, None
    return sign, tuple(w)


class FormElement:
    """Immutable linear combination of normal-ordered monomials."""

    __slots__ = ("gens", "_terms")

    def __init__(self, gens: GeneratorSet, terms: Mapping):
        self.gens = gens
        clean = {}
        for mono, c in terms.items():
            if not _is_zero(c):
                clean[tuple(mono)] = c
        self._terms = clean

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def _mono_degree(self, mono) -> int:
        return sum(self.gens.degree_of(i) for i in mono)

    @property
    def degree(self) -> Optional[int]:
        """Common degree of all monomials; ``None`` for zero or mixed forms."""
        degs = {self._mono_degree(m) for m in self._terms}
        return degs.pop() if len(degs) == 1 else None

    def _check(self, other: "FormElement"):
        if other.gens is not self.gens:
            raise GeneratorClash(f"generator sets {self.gens.name!r} and {other.gens.name!r} differ")

    def __add__(self, other):
        if not isinstance(other, FormElement):
            return NotImplemented
        self._check(other)
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out[m] + c if m in out else c
        return FormElement(self.gens, out)

    def __neg__(self):
        return FormElement(self.gens, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "FormElement":
        return FormElement(self.gens, {m: c * v for m, v in self._terms.items()})

    def __mul__(self, c):
        if isinstance(c, FormElement):
            return NotImplemented
        return self.scale(c)

    __rmul__ = __mul__

    def __xor__(self, other):
        return wedge(self, other)

    def __eq__(self, other):
        if not isinstance(other, FormElement):
            return NotImplemented
        return self.gens is other.gens and (self - other).is_zero()

    def __hash__(self):
        return id(self.gens)

    def coefficient(self, *names: str):
        """Coefficient of the monomial spelled by ``names`` (normal-ordered)."""
        sign, mono = _normal_order(self.gens, [self.gens.index_of(n) for n in names])
        if sign == 0:
            return 0
        c = self._terms.get(mono, 0)
        return c if sign == 1 else -c

    def __repr__(self):
        if not self._terms:
            return "0"
        parts = []
        for m, c in self._terms.items():
            word = "^".join(self.gens.name_of(i) for i in m) or "1"
            parts.append(f"({c!r})*{word}")
        return " + ".join(parts)


def wedge(a: FormElement, b: FormElement) -> FormElement:
    """Graded-commutative product of two forms over the same generator set."""
    a._check(b)
    out: dict = {}
    for ma, ca in a._terms.items():
        for mb, cb in b._terms.items():
            sign, mono = _normal_order(a.gens, ma + mb)
            if sign == 0:
                continue
            c = ca * cb
            if sign < 0:
                c = -c
            out[mono] = out[mono] + c if mono in out else c
    return FormElement(a.gens, out)


def d(a: FormElement) -> FormElement:
    """Exterior derivative, extended from the generators as a degree +1 derivation."""
    gens = a.gens
    out = gens.zero()
    for mono, c in a._terms.items():
        prefix_deg = 0
        for k, idx in enumerate(mono):
            dg = gens.d_of(idx)
            if not dg.is_zero():
                left = FormElement(gens, {mono[:k]: Fraction(1)})
                right = FormElement(gens, {mono[k + 1:]: Fraction(1)})
                term = wedge(wedge(left, dg), right).scale(c)
                out = out + (term if prefix_deg % 2 == 0 else -term)
            prefix_deg += gens.degree_of(idx)
    return out


class MatrixValuedForm:
    """Square matrix of forms over one generator set.

    The transpose takes entry ``(j, i)`` to ``(i, j)`` with no extra sign for
    odd-degree entries; ``antisymmetric`` asserts ``A + A^T = 0`` under that
    convention.
    """

    def __init__(self, entries, antisymmetric: bool = False):
        rows = [list(r) for r in entries]
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise ShapeError("matrix-valued forms must be square and nonempty")
        gens = rows[0][0].gens
        for r in rows:
            for e in r:
                if e.gens is not gens:
                    raise GeneratorClash("matrix entries use different generator sets")
        self.entries = tuple(tuple(r) for r in rows)
        self.gens = gens
        self.n = n
        self.antisymmetric = antisymmetric
        if antisymmetric:
            for i in range(n):
                for j in range(n):
                    if not (self.entries[i][j] + self.entries[j][i]).is_zero():
                        raise DomainError(f"entries ({i},{j}) and ({j},{i}) are not negatives")

    @classmethod
    def from_constant(cls, matrix, form: FormElement, antisymmetric: bool = False) -> "MatrixValuedForm":
        """``matrix * form`` for a numeric (rational or float) matrix."""
        m = [[form.scale(Fraction(c) if isinstance(c, (int, Rational)) else c) for c in row] for row in matrix]
        return cls(m, antisymmetric)

    @classmethod
    def zeros(cls, gens: GeneratorSet, n: int) -> "MatrixValuedForm":
        return cls([[gens.zero() for _ in range(n)] for _ in range(n)])

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def _check(self, other: "MatrixValuedForm"):
        if other.n != self.n:
            raise ShapeError(f"matrix sizes {self.n} and {other.n} differ")
        if other.gens is not self.gens:
            raise GeneratorClash("matrix-valued forms use different generator sets")

    def __add__(self, other: "MatrixValuedForm") -> "MatrixValuedForm":
        self._check(other)
        return MatrixValuedForm(
            [[self.entries[i][j] + other.entries[i][j] for j in range(self.n)] for i in range(self.n)]
        )

    def __sub__(self, other: "MatrixValuedForm") -> "MatrixValuedForm":
        return self + other.scale(-1)

    def scale(self, c) -> "MatrixValuedForm":
        return MatrixValuedForm([[e.scale(c) for e in row] for row in self.entries], self.antisymmetric)

    def wedge(self, other: "MatrixValuedForm") -> "MatrixValuedForm":
        self._check(other)
        n = self.n
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = self.gens.zero()
                for k in range(n):
                    acc = acc + wedge(self.entries[i][k], other.entries[k][j])
                row.append(acc)
            out.append(row)
        return MatrixValuedForm(out)

    def d(self) -> "MatrixValuedForm":
        return MatrixValuedForm([[d(e) for e in row] for row in self.entries], self.antisymmetric)

    def trace(self) -> FormElement:
        acc = self.gens.zero()
        for i in range(self.n):
            acc = acc + self.entries[i][i]
        return acc

    def is_zero(self) -> bool:
        return all(e.is_zero() for row in self.entries for e in row)


P1_PREFACTOR = Scalar.monomial(Fraction(-1, 2), 0, -2)  # -1/(8 pi^2) = -1/(2 tau^2)


def _p1_prefactor(numeric: bool):
    return -1.0 / (8 * math.pi**2) if numeric else P1_PREFACTOR


def _is_numeric(m: MatrixValuedForm) -> bool:
    return any(isinstance(c, float) for row in m.entries for e in row for c in e._terms.values())


def p1(A: MatrixValuedForm) -> FormElement:
    """First Pontryagin form ``-(1 / 8 pi^2) Tr(A ^ A)``."""
    if not isinstance(A, MatrixValuedForm):
        raise ShapeError("p1 expects a square matrix-valued form")
    return A.wedge(A).trace().scale(_p1_prefactor(_is_numeric(A)))


def transgress_p1_closed_form(theta: MatrixValuedForm, omega: Optional[MatrixValuedForm] = None) -> FormElement:
    """``-(1 / 8 pi^2) Tr(theta ^ d theta)``, the transgression of ``p1`` in the reduced case.

    Valid when ``theta ^ theta = 0`` and ``Tr(theta ^ Omega) = 0``; the first is
    always checked, the second when a curvature ``omega`` is supplied.

    Raises
    ------
    HypothesisViolated
        If ``theta`` has non-1-form entries or a vanishing hypothesis fails.
    """
    for row in theta.entries:
        for e in row:
            if not e.is_zero() and e.degree != 1:
                raise HypothesisViolated("theta must have 1-form entries")
    if not theta.wedge(theta).is_zero():
        raise HypothesisViolated("theta ^ theta does not vanish")
    if omega is not None and not theta.wedge(omega).trace().is_zero():
        raise HypothesisViolated("Tr(theta ^ Omega) does not vanish")
    return theta.wedge(theta.d()).trace().scale(_p1_prefactor(_is_numeric(theta)))


@dataclass(frozen=True)
class IntegrationFunctional:
    """Fiber-then-base integration on a circle bundle over a surface.

    ``fiber_value`` is the integral of the fiber generator over a fiber;
    ``base_value`` the integral of the base generator over the base. Only
    monomials ``fiber ^ base`` survive; everything else integrates to zero.
    """

    fiber_generator: str
    fiber_value: object
    base_generator: str
    base_value: object

    def __call__(self, form: FormElement):
        gens = form.gens
        a = gens.index_of(self.fiber_generator)
        e = gens.index_of(self.base_generator)
        total = 0
        for mono, c in form.terms.items():
            if mono.count(a) != 1:
                continue
            k = mono.index(a)
            rest = mono[:k] + mono[k + 1:]
            if rest != (e,):
                continue
            # move the fiber generator to the front
            sign = (-1) ** sum(gens.degree_of(i) for i in mono[:k])
            total = total + sign * c * self.fiber_value * self.base_value
        return total


def circle_generators(beta=None, numeric: bool = False):
    """Generators ``alpha`` (1) and ``e`` (2) with ``d alpha = -tau beta e``.

    Exact mode keeps ``beta`` and ``tau`` symbolic; numeric mode uses floats with
    ``tau = 2 pi`` and the given ``beta``.
    """
    gens = GeneratorSet("circle-bundle")
    alpha = gens.add("alpha", 1)
    e = gens.add("e", 2)
    if numeric:
        gens.set_d("alpha", e.scale(-2 * math.pi * float(beta)))
    else:
        gens.set_d("alpha", e.scale(Scalar.monomial(-1, 1, 1)))
    return gens, alpha, e


# the off-diagonal block of the reduced connection difference
THETA_PATTERN = ((0, 1, 0), (-1, 0, 0), (0, 0, 0))


def circle_theta(gens: GeneratorSet) -> MatrixValuedForm:
    return MatrixValuedForm.from_constant(THETA_PATTERN, gens.gen("alpha"), antisymmetric=True)


def _as_exact(beta):
    if isinstance(beta, (int, Rational)):
        return Fraction(beta)
    if isinstance(beta, str):
        return Fraction(beta)
    return None


def circle_fiber_transgression(beta, q: int):
    """Integral of the ``p1`` transgression over a circle bundle with Euler number ``q``.

    Runs the symbolic pipeline: build ``theta``, take the closed-form
    transgression, integrate over the fiber (``alpha -> tau beta``) and the
    base (``e -> q``). The result is ``-beta^2 q``. Rational ``beta`` gives an
    exact ``Fraction``; a float ``beta`` is substituted at the end and a float
    returned.

    Raises
    ------
    PiResidue
        If powers of ``tau`` fail to cancel.
    """
    if int(q) != q:
        raise DomainError("self-intersection must be an integer")
    gens, _, _ = circle_generators()
    tp1 = transgress_p1_closed_form(circle_theta(gens))
    integrate = IntegrationFunctional("alpha", Scalar.monomial(1, 1, 1), "e", Scalar.const(int(q)))
    value = integrate(tp1)
    if not isinstance(value, Scalar):
        value = Scalar.const(value)
    exact = _as_exact(beta)
    if exact is not None:
        return value.substitute_beta(exact).as_rational()
    # float beta: tau must still cancel before substitution
    if not value.tau_free:
        raise PiResidue(f"tau survives in {value!r}")
    return value.evaluate(float(beta))


def _interp_connection(omega0: MatrixValuedForm, theta: MatrixValuedForm, t: float) -> MatrixValuedForm:
    return omega0 + theta.scale(float(t))


def _curvature(omega: MatrixValuedForm) -> MatrixValuedForm:
    return omega.d() + omega.wedge(omega)


def _integrand_p1(omega0: MatrixValuedForm, theta: MatrixValuedForm, t: float) -> FormElement:
    """``p1'(R_t; theta) = -(1 / 4 pi^2) Tr(R_t ^ theta)``."""
    r = _curvature(_interp_connection(omega0, theta, t))
    return r.wedge(theta).trace().scale(-1.0 / (4 * math.pi**2))


def _gauss_legendre_01(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _sum_forms(gens: GeneratorSet, parts):
    acc = gens.zero()
    for p in parts:
        acc = acc + p
    return acc


def _max_coefficient_gap(a: FormElement, b: FormElement) -> float:
    diff = a - b
    return max((abs(float(c)) for c in diff.terms.values()), default=0.0)


def transgression_numeric(
    polynomial: str,
    omega0: MatrixValuedForm,
    omega1: MatrixValuedForm,
    t_quadrature_n: int = 3,
    check_n: int = 10,
) -> FormElement:
    """``TP(omega0, omega1) = int_0^1 P'(R_t; theta) dt`` by Gauss-Legendre in ``t``.

    ``omega_t = omega0 + t theta`` with ``theta = omega1 - omega0`` and
    ``R_t = d omega_t + omega_t ^ omega_t``. For ``p1`` the integrand is a
    polynomial of degree at most 2 in ``t``, so 3 nodes are exact; the result
    is compared with a ``check_n``-node rule.

    Raises
    ------
    QuadratureMismatch
        If the two rules disagree by more than 1e-12 in any coefficient.
    """
    if polynomial != "p1":
        raise DomainError(f"unsupported invariant polynomial {polynomial!r}")
    if t_quadrature_n < 3:
        raise DomainError("at least 3 quadrature nodes are required")
    omega0._check(omega1)
    theta = omega1 - omega0

    def rule(n):
        ts, ws = _gauss_legendre_01(n)
        return _sum_forms(omega0.gens, (_integrand_p1(omega0, theta, t).scale(float(w)) for t, w in zip(ts, ws)))

    value = rule(t_quadrature_n)
    reference = rule(check_n)
    gap = _max_coefficient_gap(value, reference)
    if gap > QUADRATURE_TOL:
        raise QuadratureMismatch(f"{t_quadrature_n}-node and {check_n}-node rules differ by {gap:.3e}")
    return value


def circle_transgression_numeric(beta: float, q: int, t_quadrature_n: int = 3) -> float:
    """Float version of :func:`circle_fiber_transgression` via :func:`transgression_numeric`."""
    gens, alpha, _ = circle_generators(beta, numeric=True)
    theta = MatrixValuedForm.from_constant([[float(c) for c in r] for r in THETA_PATTERN], alpha.scale(1.0))
    zero = MatrixValuedForm.zeros(gens, 3)
    tp = transgression_numeric("p1", zero, theta, t_quadrature_n)
    integrate = IntegrationFunctional("alpha", 2 * math.pi * float(beta), "e", float(q))
    return float(integrate(tp))


def ahat_degree4(p1_value):
    """Degree-four term of the A-hat genus, ``-p1 / 24``."""
    if isinstance(p1_value, (int, Rational)):
        return -Fraction(p1_value) / 24
    return -p1_value / 24
