"""Worked reference values for the public operations."""

from __future__ import annotations

import mpmath as mp
import numpy as np
import pytest

from edgeindex.model_operator import (
    ModelParams,
    RadialGrid,
    Vector2Field,
    greens_apply,
    homogeneous_solutions,
    reduced_operator_apply,
)
from edgeindex.projectors import (
    aps_symbol,
    calderon_from_greens_limit,
    calderon_symbol,
    det_bound_sweep,
    difference_determinant,
    norm_vs_det_check,
    projector_homotopy,
    tangential_symbol,
)


def test_calderon_example_matrix():
    # six-decimal reference; two entries sit one unit off in the last place
    np.testing.assert_allclose(
        calderon_symbol(0.5, 1.0).entries, [[0.237946, 0.340174], [0.533046, 0.762054]], atol=2e-6
    )
    ref = [[mp.besseli(1, 1) * mp.besselk(0, 1), mp.besseli(1, 1) * mp.besselk(1, 1)],
           [mp.besseli(0, 1) * mp.besselk(0, 1), mp.besseli(0, 1) * mp.besselk(1, 1)]]
    np.testing.assert_allclose(calderon_symbol(0.5, 1.0).entries, np.array(ref, dtype=float), rtol=1e-13)
    n = calderon_symbol(2.5, 7.0)
    assert abs(n.trace - 1) < 1e-12 and abs(n.det) < 1e-12


def test_aps_and_tangential_examples():
    np.testing.assert_array_equal(aps_symbol(0.5, 0.0).entries, [[0, 0], [0, 1]])
    np.testing.assert_allclose(aps_symbol(0.5, 1.0).entries, [[0.276393, 0.447214], [0.447214, 0.723607]], atol=1e-6)
    assert aps_symbol(3.0, 4.0).idempotency_defect() <= 1e-14
    np.testing.assert_array_equal(tangential_symbol(0.5, 0.0).entries, np.diag([0.5, -0.5]))
    np.testing.assert_allclose(np.linalg.eigvalsh(tangential_symbol(1.0, 2.0).entries), [-5**0.5, 5**0.5])
    # APS symbol = projection onto the negative eigenspace of the tangential symbol
    w, v = np.linalg.eigh(tangential_symbol(1.0, 2.0).entries)
    vn = v[:, w < 0]
    np.testing.assert_allclose(aps_symbol(1.0, 2.0).entries, vn @ vn.T, atol=1e-14)


def test_determinant_examples():
    assert abs(difference_determinant(0.5, 1e-4).value) < 0.05
    assert abs(difference_determinant(0.5, 1e4).value) < 0.05
    rep = det_bound_sweep([0.5], [1.0])
    assert rep.max_det == rep.min_det
    assert abs(rep.max_det - 0.007713) <= 1e-5


def test_norm_det_examples():
    r = norm_vs_det_check(0.5, 1.0)
    assert r.sqrt_abs_det == pytest.approx(0.0878, abs=1e-4)
    assert r.both_below_one
    assert norm_vs_det_check(5.0, 1e-6).op_norm < 1e-6


def test_homotopy_midpoint_example():
    f = projector_homotopy(calderon_symbol(0.5, 1.0), aps_symbol(0.5, 1.0), 0.5)
    assert f.idempotency_defect() <= 1e-10


def test_calderon_limit_example_matrix():
    rep = calderon_from_greens_limit(ModelParams(0.5, 1.0, 1), (0.99, 0.9999, 0.999999))
    np.testing.assert_allclose(rep.limit_matrix, calderon_symbol(0.5, 1.0).entries, atol=1e-4)


def test_homogeneous_solution_values():
    i_sol, k_sol = homogeneous_solutions(ModelParams(0.5, 1.0, 1), 1.0)
    np.testing.assert_allclose(i_sol, [float(mp.besseli(1, 1)), float(mp.besseli(0, 1))], rtol=1e-14)
    np.testing.assert_allclose(k_sol, [-float(mp.besselk(1, 1)), float(mp.besselk(0, 1))], rtol=1e-14)
    np.testing.assert_allclose(k_sol, [-0.6019072, 0.4210244], atol=1e-7)


def test_reduced_operator_examples():
    grid = RadialGrid.uniform(0.5, 2.0, 11)
    r = reduced_operator_apply(ModelParams(1.0, 0.0, 1), Vector2Field(np.ones(11), np.zeros(11)), grid)
    np.testing.assert_allclose(r.a, 1.5)
    np.testing.assert_allclose(r.b, 0.0)
    fine = RadialGrid.uniform(0.5, 2.0, 2001)
    s = fine.nodes
    r = reduced_operator_apply(ModelParams(0.5, 2.0, 1), Vector2Field(s, np.zeros_like(s)), fine)
    np.testing.assert_allclose(r.a, 2 * s, atol=1e-8)
    np.testing.assert_allclose(r.b, -2 * s**2, atol=1e-8)


def test_zero_rhs_maps_to_zero():
    grid = RadialGrid.with_step(1e-3, 5.0, 1e-2)
    u = greens_apply(ModelParams(1.5, 1.0, 1), Vector2Field(np.zeros(grid.nodes.size), np.zeros(grid.nodes.size)), grid)
    assert u.sup_norm() == 0.0


def test_bessel_examples():
    from edgeindex import bessel

    assert bessel.bessel_i(0, 1.0) == pytest.approx(1.2660658777520082, rel=1e-13)
    assert bessel.bessel_k(0, 1.0) == pytest.approx(0.42102443824070834, rel=1e-13)
    assert bessel.bessel_i_prime(0, 1.0) == pytest.approx(0.5651591039924851, rel=1e-13)
    assert bessel.bessel_k_prime(0, 1.0) == pytest.approx(-0.6019072301972346, rel=1e-13)
    f1, f2 = bessel.i_prime_forms(2.5, 3.0)
    assert f1 == pytest.approx(f2, rel=1e-10)
    assert abs(bessel.wronskian_residual(7.5, 20.0)) < 1e-11
    assert abs(bessel.wronskian_residual(0.0, 1e-3)) < 1e-10
    assert float(bessel.scaled_product(0.5, 1.0)) == pytest.approx((1 - np.exp(-2)) / 2, rel=1e-13)
    assert float(bessel.scaled_product(0.5, 1e4)) == pytest.approx(0.5, abs=1e-12)
    assert float(bessel.scaled_product(3.0, 1e-6)) < 1e-5


def test_witt_examples():
    from fractions import Fraction

    from edgeindex.witt import FiberSpectrum, Spin, circle_spectrum, cone_scalar_curvature, indicial_roots, psc_delta_threshold, psc_leading_scalar, witt_gap_check

    half = Fraction(1, 2)
    assert circle_spectrum(1, Spin.NONTRIVIAL, 3).eigenvalues == tuple(k * half for k in (-5, -3, -1, 1, 3, 5))
    assert circle_spectrum(1, Spin.TRIVIAL, 2).eigenvalues == (-2, -1, 0, 1, 2)
    assert circle_spectrum(2, Spin.NONTRIVIAL, 1).eigenvalues == tuple(Fraction(k, 4) for k in (-3, -1, 1, 3))
    r = witt_gap_check(FiberSpectrum.finite(["0.4", "-0.4", "1.4", "-1.4"]))
    assert not r.holds and r.margin == Fraction(-1, 10)
    roots = indicial_roots(FiberSpectrum.finite(["0.3", "-0.3"]))
    assert set(roots.roots) == {Fraction(1, 5), Fraction(4, 5)} and not roots.witt_consequence
    sym = FiberSpectrum.finite([half, -half, 3, -3])
    rs = set(indicial_roots(sym).roots)
    assert {1 - x for x in rs} == rs
    assert cone_scalar_curvature(6, 2, 1) == 4
    assert cone_scalar_curvature(0, 1, Fraction(1, 2)) == 0
    for f in range(1, 11):
        assert cone_scalar_curvature(f * (f - 1), f, Fraction(3, 7)) == 0
    assert psc_leading_scalar(1, 0) == 2
    assert psc_delta_threshold(-8.0) == pytest.approx(0.5)


def test_form_examples():
    from fractions import Fraction

    from edgeindex.forms import GeneratorSet, MatrixValuedForm, Scalar, ahat_degree4, circle_fiber_transgression, circle_generators, circle_theta, d, p1, transgress_p1_closed_form, wedge

    gens, alpha, e = circle_generators()
    assert wedge(alpha, alpha).is_zero()
    assert d(alpha) == e.scale(Scalar.monomial(-1, 1, 1))
    assert d(d(alpha)).is_zero()
    t = transgress_p1_closed_form(circle_theta(gens))
    assert t == wedge(alpha, e).scale(Scalar.monomial(-1, 1, -1))
    g = GeneratorSet("w")
    w = g.add("w", 2)
    a = MatrixValuedForm([[g.zero(), w], [-w, g.zero()]], antisymmetric=True)
    assert p1(a) == wedge(w, w).scale(Scalar.monomial(1, 0, -2))
    assert p1(a.scale(3)) == p1(a).scale(9)
    assert p1(MatrixValuedForm.zeros(g, 2)).is_zero()
    assert circle_fiber_transgression(1, 1) == -1
    assert circle_fiber_transgression(Fraction(1, 2), -4) == 1
    assert circle_fiber_transgression(Fraction(2, 3), 0) == 0
    assert ahat_degree4(0) == 0 and ahat_degree4(24) == -1


def test_index_examples():
    import math
    from fractions import Fraction

    from edgeindex.index4d import EdgeData4D, SignatureData4D, adiabatic_eta_limit, dirac_index_4d, signature_4d

    assert dirac_index_4d(EdgeData4D(0, 0, Fraction(1, 2))).value == 0
    r = dirac_index_4d(EdgeData4D(0, 24, Fraction(1, 2)))
    assert r.value == Fraction(-3, 4) and r.non_integer
    assert signature_4d(SignatureData4D(0.0, 0, Fraction(1, 3))) == 0
    assert signature_4d(SignatureData4D(12 * math.pi**2, 0, 1)) == pytest.approx(1.0, rel=1e-15)
    assert adiabatic_eta_limit(0) == 0 and adiabatic_eta_limit(24) == 1
