import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from adelheat import Filtration, FiniteAdele, RadialProfile, TestFunction, character, fourier, inverse_fourier
from adelheat.errors import UsageError
from adelheat.oracles import dft_fourier
from adelheat.schwartz import (
    apply_symbol,
    char_integral_ball,
    char_integral_sphere,
    eigenfunction_eval,
    fourier_matrix,
    rep_norm_indices,
    space_dimension,
)

F = Filtration.factorial(window=(-40, 40))
SPACES = [(1, -1), (2, -1), (1, -2), (0, -3), (2, -2)]


def random_tf(rng, k, l):
    n = space_dimension(F, k, l)
    return TestFunction(F, k, l, rng.normal(size=n) + 1j * rng.normal(size=n))


def character_sum_fourier(tf):
    """``F phi(xi) = sum_c phi(c) chi(xi c) e^{psi(l)}`` through the adele character."""
    out = []
    vol = float(F.psi_value(tf.l))
    dual = TestFunction.zeros(F, -tf.l, -tf.k)
    for b in range(dual.dim):
        xi = dual.rep(b)
        total = 0j
        for a in range(tf.dim):
            total += tf.coeffs[a] * character(xi, tf.rep(a))
        out.append(vol * total)
    return np.array(out)


@pytest.mark.parametrize("k,l", [(1, -1), (2, -1), (1, -2)])
def test_fft_matches_character_sums(rng, k, l):
    tf = random_tf(rng, k, l)
    assert tf.dim <= 120
    assert np.allclose(fourier(tf).coeffs, character_sum_fourier(tf), atol=1e-12)


@pytest.mark.parametrize("k,l", SPACES)
def test_fft_matches_explicit_dft(rng, k, l):
    tf = random_tf(rng, k, l)
    ref = dft_fourier(tf.coeffs, float(F.psi_value(l)))
    assert np.allclose(fourier(tf).coeffs, ref, atol=1e-12)


@pytest.mark.parametrize("k,l", SPACES)
def test_inversion_and_parseval(rng, k, l):
    tf = random_tf(rng, k, l)
    g = fourier(tf)
    back = inverse_fourier(g)
    assert (back.k, back.l) == (k, l)
    assert np.max(np.abs(back.coeffs - tf.coeffs)) < 1e-12
    assert abs(tf.inner(tf) - g.inner(g)) < 1e-12 * abs(tf.inner(tf))


@pytest.mark.parametrize("k,l", SPACES)
def test_double_transform_is_reflection(rng, k, l):
    tf = random_tf(rng, k, l)
    ff = fourier(fourier(tf))
    assert np.max(np.abs(ff.coeffs - tf.negate().coeffs)) < 1e-12 * np.abs(tf.coeffs).max() * tf.dim


@pytest.mark.parametrize("k,l", [(1, -1), (2, -2)])
def test_fourier_matrix_unitary_up_to_measure(k, l):
    m = fourier_matrix(F, k, l)
    n = m.shape[0]
    # F^* F = e^{psi(l)}^2 N I
    gram = m.conj().T @ m
    expected = float(F.psi_value(l)) ** 2 * n
    assert np.max(np.abs(gram - expected * np.eye(n))) < 1e-12 * expected


def test_matrix_cap():
    with pytest.raises(UsageError):
        fourier_matrix(F, 4, -4, cap=100)


def test_ball_indicator_transform():
    # F(1_{B_n}) = e^{psi(n)} 1_{B_{-n}}
    for n in (-1, 0, 1):
        tf = TestFunction.ball_indicator(F, 2, -2, n)
        g = fourier(tf)
        shells = rep_norm_indices(F, g.k, g.l)
        expected = np.where(shells <= -n, float(F.psi_value(n)), 0.0)
        assert np.allclose(g.coeffs, expected, atol=1e-12)


def test_rep_norm_indices_match_adeles():
    for k, l in SPACES:
        tf = TestFunction.zeros(F, k, l)
        idx = rep_norm_indices(F, k, l)
        for a in range(1, tf.dim):
            assert tf.rep(a).norm_index() == idx[a]


def test_sphere_integrals():
    # int_{S_n} chi = mu(S_n) inside, -e^{psi(n-1)} on the boundary shell, 0 beyond
    n = 1
    mu = F.psi_value(1) - F.psi_value(0)
    assert char_integral_sphere(F, n, F.psi_value(-1)) == mu
    assert char_integral_sphere(F, n, F.psi_value(0)) == -F.psi_value(0)
    assert char_integral_sphere(F, n, F.psi_value(1)) == 0
    assert char_integral_ball(F, 2, 0) == F.psi_value(2)


@given(st.integers(-6, 6))
def test_eigenfunction_vanishes_far_out(n):
    assert eigenfunction_eval(F, n, 2 - n) == 0
    assert eigenfunction_eval(F, n, 1 - n) == -F.psi_value(n - 1)
    assert eigenfunction_eval(F, n, -n) == F.psi_value(n) - F.psi_value(n - 1)


def test_eigenfunction_matches_fft_of_sphere():
    # F^{-1}(1_{S_n}) sampled on D_k^l agrees with the closed form
    n = 1
    g = TestFunction.ball_indicator(F, 2, -2, n)
    g.coeffs -= TestFunction.ball_indicator(F, 2, -2, n - 1).coeffs
    h = inverse_fourier(g)
    shells = rep_norm_indices(F, h.k, h.l)
    expected = [float(eigenfunction_eval(F, n, int(m))) for m in shells]
    assert np.allclose(h.coeffs, expected, atol=1e-12)


def test_radialize_fixes_radial(rng):
    tf = TestFunction.ball_indicator(F, 2, -1, 1)
    assert np.allclose(tf.radialize().coeffs, tf.coeffs)
    r = random_tf(rng, 2, -1).radialize()
    assert np.allclose(r.radialize().coeffs, r.coeffs)


def test_apply_symbol_eigen():
    # D^alpha on F^{-1}(1_{S_n}) scales by e^{alpha psi(n)}
    n, alpha = 1, 1.5
    g = TestFunction.ball_indicator(F, 2, -2, n)
    g.coeffs -= TestFunction.ball_indicator(F, 2, -2, n - 1).coeffs
    h = inverse_fourier(g)
    out = apply_symbol(h, alpha)
    assert np.allclose(out.coeffs, math.exp(alpha * F.log_psi(n)) * h.coeffs, atol=1e-12)
    with pytest.raises(UsageError):
        apply_symbol(TestFunction.ball_indicator(F, 1, -1, 0), alpha)


def test_profile_semigroup():
    p = RadialProfile(F, {0: 1.0, 2: 2.0})
    q = p.apply_semigroup(1.0, 0.5)
    assert q(0) == pytest.approx(math.exp(-0.5))
    assert q(2) == pytest.approx(2 * math.exp(-0.5 * 6))
    assert p.support_top() == 1


def test_json_roundtrip(rng):
    tf = random_tf(rng, 1, -1)
    again = TestFunction.from_json(F, tf.to_json())
    assert np.allclose(again.coeffs, tf.coeffs)


def test_index_of_outside_support():
    tf = TestFunction.zeros(F, 0, -2)
    assert tf.index_of(FiniteAdele.from_rational(F, Fraction(1, 2), truncation=4)) is None
