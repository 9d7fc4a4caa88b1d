from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cuspidal import geometry as geo
from cuspidal.verify import random_orbit_point

coord = st.floats(min_value=-3, max_value=3, allow_nan=False)
small_n = st.integers(3, 6)


def test_basic_matrices():
    for n in range(3, 7):
        S, K = geo.S_matrix(n), geo.kappa(n)
        assert np.allclose(S @ S, np.eye(n))
        assert np.allclose(K @ K.T, np.eye(n))
        assert np.isclose(np.linalg.det(K), 1.0)
        # kappa conjugates S to a diagonal matrix
        D = K.T @ S @ K
        assert np.allclose(D, np.diag(np.diag(D)))
        assert geo.in_H(geo.k0(n))
        assert np.allclose(geo.k0(n) @ geo.a_t(n, 0.7) @ geo.k0(n).T, geo.a_t(n, -0.7))


@given(small_n, st.floats(-3, 3))
def test_radial_along_a(n, t):
    assert np.isclose(geo.radial(geo.a_t(n, t)), 2 * np.cosh(4 * t), rtol=1e-10)


@given(small_n, st.integers(0, 2**32 - 1))
def test_radial_is_bi_invariant(n, seed):
    rng = np.random.default_rng(seed)
    g = geo.u_xyz(rng.normal(size=n - 2), rng.normal(size=n - 2), float(rng.normal()))
    h = geo.random_H(n, rng)
    assert geo.in_H(h)
    moved = geo.random_K(n, rng) @ g @ h
    assert np.isclose(geo.radial(moved), geo.radial(g), rtol=1e-7)


@given(small_n, st.integers(0, 2**32 - 1))
def test_cosh_rank1_matches_matrix(n, seed):
    rng = np.random.default_rng(seed)
    x, y, z = rng.normal(size=n - 2), rng.normal(size=n - 2), float(rng.normal())
    assert np.isclose(geo.cosh_rank1(x, y, z), geo.radial(geo.u_xyz(x, y, z)), rtol=1e-9)


@given(st.integers(3, 6).flatmap(lambda n: st.tuples(st.just(n), st.integers(2, n)).flatmap(
    lambda nk: st.tuples(st.just(nk[0]), st.just(nk[1]), st.integers(nk[1], nk[0])))),
    st.integers(0, 2**32 - 1))
def test_reduced_form_and_completed_square(nkl, seed):
    n, k, l = nkl
    rng = np.random.default_rng(seed)
    xsl, ysl, psl = geo._support_slices(n, k, l)
    x, y = np.zeros(n - 2), np.zeros(n - 2)
    x[xsl] = rng.normal(size=n - k)
    y[ysl] = rng.normal(size=l - 2)
    z = float(rng.normal())
    direct = geo.cosh_rank1(x, y, z)
    assert np.isclose(geo.cosh_rank1_reduced(k, l, x, y, z), direct, rtol=1e-10)
    cp, jac = geo.completed_square(n, k, l, y @ y, y[psl] @ y[psl], z)
    xs = geo.shifted_x(k, l, x, y, z)
    assert np.isclose(xs @ xs + cp, direct, rtol=1e-9)
    A, _, _ = geo.reduced_coefficients(k, l, y, z)
    As = A[xsl, xsl]
    assert np.isclose(jac, 1 / np.sqrt(np.linalg.det(As)) if n > k else jac, rtol=1e-9)
    vv = y[:k - 2] @ y[:k - 2]
    ww = y[psl] @ y[psl]
    assert geo.cprime_lower_bound(vv, ww, z) <= cp * (1 + 1e-12)


def test_support_violation_rejected():
    with pytest.raises(ValueError):
        geo.cosh_rank1_reduced(3, 3, np.array([1.0, 1.0, 0.0]), np.zeros(3), 0.0)


@given(small_n, st.integers(0, 2**32 - 1))
def test_cosh_rank0_matches_matrix(n, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=n - 1)
    y = rng.normal(size=n - 1)
    y -= (x @ y) / (x @ x) * x
    assert np.isclose(geo.cosh_rank0(x, y), geo.radial(geo.v_xy(x, y)), rtol=1e-9)


def test_rank0_requires_orthogonality():
    with pytest.raises(ValueError):
        geo.v_xy(np.ones(2), np.ones(2))
    with pytest.raises(ValueError):
        geo.cosh_rank0(np.ones(2), np.ones(2))


def test_w_family_is_conjugate_of_v_family():
    rng = np.random.default_rng(3)
    for n in range(3, 7):
        x = rng.normal(size=n - 2)
        y = rng.normal(size=n - 2)
        y -= (x @ y) / (x @ x) * x
        g = geo.w_xyz(x, y, 0.3)
        assert np.isclose(np.linalg.det(g), 1.0)
        assert geo.radial(g) >= 2


@given(small_n.flatmap(lambda n: st.tuples(st.just(n), st.integers(2, n))),
       st.floats(-4, 4), st.integers(0, 2**32 - 1))
def test_cosh_hc_matches_matrix(nk, s, seed):
    n, k = nk
    rng = np.random.default_rng(seed)
    x, y, z = rng.normal(size=n - k), rng.normal(size=k - 2), float(rng.normal())
    m = geo.radial(geo.a_t(n, s) @ geo.embed_hc(n, k, x, y, z))
    assert np.isclose(geo.cosh_hc(s, x, y, z), m, rtol=1e-8)


@given(st.fractions(min_value=Fraction(1, 1000), max_value=1000),
       st.fractions(min_value=-1000, max_value=1000))
def test_f_identity_exact(q, z):
    f1, f2, f3 = geo.f_triple_exact(q, z)
    assert f2 * f3 - f1 == 2


@given(st.floats(-8, 8), st.floats(-50, 50))
def test_f_identity_floating(s, z):
    f1, f2, f3 = geo.f_triple(s, z)
    assert abs(f2 * f3 - f1 - 2) <= 1e-12 * max(1.0, f1) * 16


def test_sl2_core_limit_decays():
    d = geo.sl2_core_limit([0, 2, 4, 6, 8])
    assert all(b < a for a, b in zip(d, d[1:]))
    assert d[-1] < 1e-6


@pytest.mark.parametrize("n", [3, 5])
def test_orbit_limit_converges_with_half_scale(n):
    rng = np.random.default_rng(11)
    xi, eta, om = random_orbit_point(n, rng)
    d = geo.orbit_limit_check(n, xi, eta, om, [2, 4, 6, 8])
    assert all(b < a for a, b in zip(d, d[1:]))
    assert d[-1] < 1e-5
    # distances fall roughly like e^{-2s}
    assert 20 < d[1] / d[2] < 200


@pytest.mark.parametrize("n", [3, 5])
def test_orbit_limit_two_thirds_scale_does_not_converge(n):
    rng = np.random.default_rng(11)
    xi, eta, om = random_orbit_point(n, rng)
    d = geo.orbit_limit_check(n, xi, eta, om, [6, 8, 10], limit_scale=2 / 3)
    assert min(d) > 1e-2
    assert abs(d[-1] - d[-2]) < 1e-3 * d[-1]


def test_orbit_limit_input_validation():
    with pytest.raises(ValueError):
        geo.orbit_limit_check(4, np.zeros(2), np.zeros(2), 0.0, [1])
    with pytest.raises(ValueError):
        geo.orbit_limit_check(5, np.ones(3), np.zeros(3), 0.0, [1])
