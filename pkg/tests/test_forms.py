from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from edgeindex.errors import DomainError, GeneratorClash, HypothesisViolated, PiResidue, ShapeError
from edgeindex.forms import (
    GeneratorSet,
    MatrixValuedForm,
    Scalar,
    ahat_degree4,
    circle_fiber_transgression,
    circle_generators,
    circle_theta,
    circle_transgression_numeric,
    d,
    p1,
    transgress_p1_closed_form,
    transgression_numeric,
    wedge,
)


def _dga():
    # four 1-forms with d u = x ^ y, everything else closed
    g = GeneratorSet("dga")
    x, y, z, u = (g.add(n, 1) for n in "xyzu")
    g.set_d("u", wedge(x, y))
    return g, (x, y, z, u)


coeffs = st.lists(st.integers(-3, 3), min_size=4, max_size=4)


def _one_form(c, basis):
    out = basis[0].gens.zero()
    for ci, b in zip(c, basis):
        out = out + b.scale(Fraction(ci))
    return out


@given(coeffs, coeffs)
def test_graded_commutativity(c1, c2):
    g, basis = _dga()
    a, b = _one_form(c1, basis), _one_form(c2, basis)
    assert wedge(a, b) == -wedge(b, a)
    assert wedge(a, a).is_zero()


@given(coeffs, coeffs, coeffs)
def test_associativity_and_leibniz(c1, c2, c3):
    g, basis = _dga()
    a, b, c = (_one_form(ci, basis) for ci in (c1, c2, c3))
    assert wedge(wedge(a, b), c) == wedge(a, wedge(b, c))
    # d(a ^ b) = da ^ b - a ^ db for a of degree 1
    assert d(wedge(a, b)) == wedge(d(a), b) - wedge(a, d(b))
    assert d(d(a)).is_zero() and d(d(wedge(a, b))).is_zero()


def test_generator_guards():
    g = GeneratorSet("a")
    x = g.add("x", 1)
    with pytest.raises(DomainError):
        g.add("x", 1)
    with pytest.raises(DomainError):
        g.set_d("x", x)
    other = GeneratorSet("b")
    y = other.add("y", 1)
    with pytest.raises(GeneratorClash):
        x + y
    with pytest.raises(ShapeError):
        MatrixValuedForm([[x, x]])


def _random_connection(rng, basis, n=3):
    entries = []
    for i in range(n):
        row = []
        for j in range(n):
            c = rng.normal(size=4)
            row.append(sum((b.scale(float(ci)) for ci, b in zip(c, basis)), basis[0].gens.zero()))
        entries.append(row)
    return MatrixValuedForm(entries)


def _curvature(w):
    return w.d() + w.wedge(w)


def test_numeric_transgression_identity():
    # Chern-Weil: d TP(w0, w1) = p1(R1) - p1(R0)
    rng = np.random.default_rng(11)
    g, basis = _dga()
    w0, w1 = _random_connection(rng, basis), _random_connection(rng, basis)
    tp = transgression_numeric("p1", w0, w1)
    lhs = d(tp)
    rhs = p1(_curvature(w1)) - p1(_curvature(w0))
    gap = max((abs(float(c)) for c in (lhs - rhs).terms.values()), default=0.0)
    scale = max(abs(float(c)) for c in rhs.terms.values())
    assert gap <= 1e-12 * max(scale, 1.0)


def test_p1_is_closed():
    rng = np.random.default_rng(5)
    g, basis = _dga()
    form = d(p1(_curvature(_random_connection(rng, basis))))
    assert max((abs(float(c)) for c in form.terms.values()), default=0.0) < 1e-12


@pytest.mark.parametrize("beta", [Fraction(1, 3), Fraction(1, 2), Fraction(1)])
@pytest.mark.parametrize("q", range(-5, 6))
def test_circle_transgression_exact(beta, q):
    value = circle_fiber_transgression(beta, q)
    assert isinstance(value, Fraction)
    assert value == -beta**2 * q


@pytest.mark.parametrize("beta,q", [(0.7, 3), (0.25, -2), (1.0, 5)])
def test_circle_transgression_numeric_agrees(beta, q):
    assert circle_transgression_numeric(beta, q) == pytest.approx(-beta**2 * q, abs=1e-12)
    assert circle_fiber_transgression(beta, q) == pytest.approx(-beta**2 * q, abs=1e-12)


def test_circle_example_value():
    assert circle_transgression_numeric(0.7, 3) == pytest.approx(-1.47, abs=1e-12)


def test_closed_form_hypotheses():
    gens, _, _ = circle_generators()
    theta = circle_theta(gens)
    assert theta.wedge(theta).is_zero()
    g, (x, y, z, u) = _dga()
    bad = MatrixValuedForm([[x, y], [z, u]])
    with pytest.raises(HypothesisViolated):
        transgress_p1_closed_form(bad)


def test_scalar_tau_bookkeeping():
    s = Scalar.monomial(3, 2, -1)
    assert not s.tau_free
    with pytest.raises(PiResidue):
        s.as_rational()
    assert (s * Scalar.monomial(1, 0, 1)).substitute_beta(Fraction(1, 2)).as_rational() == Fraction(3, 4)
    assert Scalar.monomial(1, 1, 1).evaluate(0.5) == pytest.approx(math.pi)


def test_ahat():
    assert ahat_degree4(-48) == 2
    assert ahat_degree4(Fraction(-3)) == Fraction(1, 8)
    assert ahat_degree4(-2.4) == pytest.approx(0.1)
