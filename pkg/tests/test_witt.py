from __future__ import annotations

import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from edgeindex.errors import DomainError, EmptySpectrum, TruncationError
from edgeindex.witt import (
    FiberSpectrum,
    Spin,
    circle_spectrum,
    cone_scalar_curvature,
    indicial_roots,
    psc_delta_threshold,
    psc_leading_scalar,
    psc_witt_note,
    read_spectrum_file,
    witt_gap_check,
)


def _fd_dirac_abs_spectrum(beta, spin, n=800):
    """|eigenvalues| of -i d/dtheta on a circle of length 2 pi beta via the FD square."""
    length = 2 * np.pi * beta
    h = length / n
    lap = np.diag(np.full(n, 2.0)) - np.diag(np.ones(n - 1), 1) - np.diag(np.ones(n - 1), -1)
    wrap = -1.0 if spin is Spin.NONTRIVIAL else 1.0
    lap[0, -1] = lap[-1, 0] = -wrap
    ev = np.linalg.eigvalsh(lap / h**2)
    return np.sqrt(np.clip(ev, 0, None))


@pytest.mark.parametrize("beta", [Fraction(1, 3), Fraction(1, 2), Fraction(1), Fraction(3, 2)])
@pytest.mark.parametrize("spin", list(Spin))
def test_circle_spectrum_against_eigensolve(beta, spin):
    spec = circle_spectrum(beta, spin, cutoff=3)
    fd = _fd_dirac_abs_spectrum(float(beta), spin)
    exact = np.sort(np.abs([float(v) for v in spec.eigenvalues]))
    np.testing.assert_allclose(fd[: exact.size], exact, atol=2e-3)
    assert float(spec.min_abs()) == pytest.approx(fd[0], abs=2e-3)


def test_spin_examples():
    assert witt_gap_check(circle_spectrum(1, Spin.NONTRIVIAL)).margin == 0
    assert witt_gap_check(circle_spectrum(Fraction(1, 2))).margin == Fraction(1, 2)
    r = witt_gap_check(circle_spectrum(2))
    assert not r.holds and r.margin == Fraction(-1, 4)
    assert not witt_gap_check(circle_spectrum(Fraction(1, 2), Spin.TRIVIAL)).holds


@given(st.fractions(min_value=Fraction(1, 1000), max_value=4))
def test_circle_witt_equivalence(beta):
    r = witt_gap_check(circle_spectrum(beta))
    assert r.holds == (beta <= 1)
    assert r.margin == Fraction(1, 2) / beta - Fraction(1, 2)


@given(st.lists(st.fractions(min_value=Fraction(1, 2), max_value=20, max_denominator=50), min_size=1, max_size=12))
def test_witt_spectra_roots_avoid_unit_interval(pos):
    spec = FiberSpectrum.finite(pos + [-v for v in pos])
    assert witt_gap_check(spec).holds
    roots = indicial_roots(spec)
    assert roots.witt_consequence
    assert not any(0 < r < 1 for r in roots.roots)
    assert spec.symmetric


def test_indicial_roots_of_circle():
    roots = indicial_roots(circle_spectrum(2, cutoff=1))
    assert roots.roots == tuple(Fraction(k, 4) for k in (-1, 1, 3, 5))
    assert not roots.witt_consequence


def test_truncation_and_membership():
    spec = circle_spectrum(1, cutoff=2)
    assert spec.contains(Fraction(1001, 2))
    assert not spec.contains(1)
    finite = FiberSpectrum(tuple([Fraction(1, 2), Fraction(-1, 2)]), cutoff=Fraction(1))
    with pytest.raises(TruncationError):
        finite.contains(5)
    with pytest.raises(EmptySpectrum):
        FiberSpectrum.finite([]).min_abs()
    with pytest.raises(DomainError):
        circle_spectrum(0)


def test_read_spectrum_file(tmp_path):
    p = tmp_path / "spec.txt"
    p.write_text("# eigenvalues\n0.75\n-0.75\n\n1.5 # comment\n")
    spec = read_spectrum_file(p)
    assert spec.eigenvalues == (Fraction(-3, 4), Fraction(3, 4), Fraction(3, 2))
    assert witt_gap_check(spec).margin == Fraction(1, 4)
    assert not spec.symmetric
    empty = tmp_path / "empty.txt"
    empty.write_text("# nothing\n")
    with pytest.raises(EmptySpectrum):
        read_spectrum_file(empty)


def test_random_witt_spectra_batch():
    rng = random.Random(7)
    for _ in range(1000):
        vals = [Fraction(rng.randint(50, 2000), 100) for _ in range(rng.randint(1, 6))]
        spec = FiberSpectrum.finite(vals + [-v for v in vals])
        assert indicial_roots(spec).witt_consequence


def test_scalar_curvature_helpers():
    assert cone_scalar_curvature(2, 2, 1) == 0
    assert cone_scalar_curvature(6, 3, 2) == Fraction(0)
    assert cone_scalar_curvature(1, 3, 2) == Fraction(-5, 4)
    assert psc_witt_note(True).witt_implied and not psc_witt_note(False).witt_implied
    assert psc_leading_scalar(Fraction(1, 2), -1) == 7
    assert psc_delta_threshold(-2.0) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        cone_scalar_curvature(1, 0, 1)
