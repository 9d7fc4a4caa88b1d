import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cuspidal.integrate import (
    IntegrationConfig,
    InnerTable,
    Prediction,
    Verdict,
    analyse_schedule,
    inner_converges,
    integrate_rank0,
    integrate_rank1,
    level_sums,
    monte_carlo_rank0,
    monte_carlo_rank1,
    predicted_verdict,
    _rank1_builder,
)
from cuspidal.parabolics import ParabolicClass
from cuspidal.profiles import PowerNu, SchwartzM

CFG = IntegrationConfig()

# independent 1-D oracles, evaluated with mpmath
mp.mp.dps = 30
RANK1_N3 = float(mp.pi * mp.quad(lambda z: 1 / mp.sqrt((z ** 4 + 2) * ((1 + z) ** 2 + 1)), [-mp.inf, -1, 1, mp.inf]))
RANK0_N3 = float(mp.pi * mp.quad(lambda y: 1 / mp.sqrt((2 + 4 * y * y) * (4 + 4 * y * y)), [-mp.inf, 0, mp.inf]))


def test_frozen_oracles():
    assert RANK1_N3 == pytest.approx(5.432544834365849, rel=1e-13)
    assert RANK0_N3 == pytest.approx(2.912373692708428, rel=1e-13)


def test_rank1_value_against_oracle():
    v = integrate_rank1(3, 2, 2, PowerNu(-1, 3))
    assert v.status is Verdict.CONVERGENT
    assert v.value == pytest.approx(RANK1_N3, rel=1e-7)
    assert v.error_estimate < 1e-5


def test_rank0_value_against_oracle():
    v = integrate_rank0(3, 2, PowerNu(-1, 3))
    assert v.status is Verdict.CONVERGENT
    assert v.value == pytest.approx(RANK0_N3, rel=1e-7)


@pytest.mark.parametrize("d,nu,A", [(1, -1.0, 2.0), (1, -1.0, 1e6), (2, -1.25, 5.0), (3, -2.0, 40.0)])
def test_inner_table_matches_direct_quadrature(d, nu, A):
    t = InnerTable(PowerNu(nu, 5), d)
    assert t(A) == pytest.approx(t.direct(A), rel=1e-8)


def test_inner_table_closed_form():
    # d = 1, phi = r^{-1}: H(A) = pi / (2A)
    t = InnerTable(PowerNu(-1, 3), 1)
    for A in (2.0, 17.0, 1e10):
        assert t(A) == pytest.approx(math.pi / (2 * A), rel=1e-9)


def test_inner_table_log_profile():
    t = InnerTable(SchwartzM(3, 5), 2)
    # between spline nodes the interpolation error is a few 1e-7
    for A in (2.0, 3.0, 10.0, 1e5):
        assert t(A) == pytest.approx(t.direct(A), rel=1e-6)


def test_inner_convergence_rule():
    assert inner_converges(PowerNu(-1, 3), 1)
    assert not inner_converges(PowerNu(-1, 5), 2)
    assert inner_converges(SchwartzM(3, 5), 2)
    assert not inner_converges(SchwartzM(1, 5), 2)
    with pytest.raises(ValueError):
        InnerTable(PowerNu(-1, 5), 2)


def _synthetic(increments):
    sums = np.zeros(CFG.levels + 1)
    sums[1:] = increments
    return analyse_schedule(sums, CFG)


def test_schedule_classification_synthetic():
    R = CFG.radii()
    v = _synthetic(R ** -0.5)
    assert v.status is Verdict.CONVERGENT
    assert v.value == pytest.approx(np.sum(R ** -0.5) + R[-1] ** -0.5 * 2 ** -0.5 / (1 - 2 ** -0.5), rel=1e-12)
    v = _synthetic(R ** 0.3)
    assert v.status is Verdict.DIVERGENT and v.growth_exponent == pytest.approx(0.3)
    v = _synthetic(np.ones_like(R))
    assert v.status is Verdict.DIVERGENT and abs(v.growth_exponent) < 1e-12
    v = _synthetic(np.where(np.arange(len(R)) % 2, 1.0, -1.0))
    assert v.status is Verdict.INCONCLUSIVE
    v = _synthetic(np.where(R < 1e3, 1.0, 0.0))
    assert v.status is Verdict.CONVERGENT and v.growth_exponent == -math.inf


@given(st.floats(0.1, 2.0))
def test_geometric_tails_are_convergent(p):
    assert _synthetic(CFG.radii() ** -p).status is Verdict.CONVERGENT


@given(st.floats(0.025, 0.1))
def test_slow_decay_is_never_called_divergent(p):
    # the extrapolated tail may be too large to certify, but never a divergence;
    # decay slower than slope_tol is indistinguishable from log growth on 64 doublings
    assert _synthetic(CFG.radii() ** -p).status is not Verdict.DIVERGENT


@given(st.floats(0.05, 2.0))
def test_power_growth_is_divergent(p):
    v = _synthetic(CFG.radii() ** p)
    assert v.status is Verdict.DIVERGENT
    assert v.growth_exponent == pytest.approx(p, rel=1e-9)


def test_truncated_values_are_monotone():
    v = integrate_rank1(4, 3, 3, PowerNu(-1.25, 4))
    vals = v.truncated_values
    assert np.all(np.diff(vals) >= 0)
    assert v.status is Verdict.CONVERGENT
    assert v.value == pytest.approx(9.17959597584882, rel=1e-6)


def test_threaded_sums_are_bitwise_identical():
    import dataclasses
    build, q = _rank1_builder(5, 3, 3, SchwartzM(8, 5), CFG)
    small = dataclasses.replace(CFG, chunk_elems=1 << 12)
    one = level_sums(build(q), dataclasses.replace(small, threads=1))
    many = level_sums(build(q), dataclasses.replace(small, threads=3))
    assert np.array_equal(one, many)


@pytest.mark.parametrize("n,k,l,prof,value", [
    (5, 3, 3, SchwartzM(8, 5), 0.009197173677377731),
    (5, 3, 4, PowerNu(-1.5, 5), 70.91557750046745),
])
def test_convergent_examples(n, k, l, prof, value):
    v = integrate_rank1(n, k, l, prof)
    assert v.status is Verdict.CONVERGENT
    assert v.value == pytest.approx(value, rel=1e-6)


def test_divergent_example_has_fitted_growth():
    v = integrate_rank1(5, 2, 2, PowerNu(-1.25, 5))
    assert v.status is Verdict.DIVERGENT
    assert v.growth_exponent == pytest.approx(0.5, abs=0.02)
    assert v.fit_r2 >= 0.99


@pytest.mark.parametrize("n,k,prof,expected", [
    (3, 2, PowerNu(-1, 3), Verdict.CONVERGENT),
    (5, 3, SchwartzM(3, 5), Verdict.CONVERGENT),
    (4, 2, PowerNu(-0.9, 4), Verdict.DIVERGENT),
    (5, 3, PowerNu(-1, 5), Verdict.DIVERGENT),
])
def test_rank0_examples(n, k, prof, expected):
    assert integrate_rank0(n, k, prof).status is expected


def test_schwartz_m_divergence_is_detected():
    # slow logarithmic growth: only visible on the long doubling schedule
    v = integrate_rank1(5, 2, 2, SchwartzM(8, 5))
    assert v.status is Verdict.DIVERGENT and v.growth_exponent > 0


@pytest.mark.parametrize("n,k,l,nu", [(5, 2, 3, -1.6), (5, 2, 2, -1.6), (4, 2, 3, -1.25)])
def test_duality_of_integrals(n, k, l, nu):
    a = integrate_rank1(n, k, l, PowerNu(nu, n))
    b = integrate_rank1(n, n + 2 - l, n + 2 - k, PowerNu(nu, n))
    assert a.status is b.status
    if a.status is Verdict.CONVERGENT:
        assert a.value == pytest.approx(b.value, rel=1e-4)


@pytest.mark.parametrize("n,k,l,prof", [
    (3, 2, 2, PowerNu(-1, 3)),
    (5, 3, 3, SchwartzM(8, 5)),
    (4, 3, 3, PowerNu(-1.25, 4)),
    (5, 3, 4, PowerNu(-1.5, 5)),
])
def test_monte_carlo_agrees_with_quadrature(n, k, l, prof):
    v = integrate_rank1(n, k, l, prof)
    mean, se = monte_carlo_rank1(n, k, l, prof, samples=1 << 19, seed=7)
    assert abs(mean - v.value) <= 3 * se + 1e-3 * abs(v.value)


@pytest.mark.parametrize("n,k,prof", [(3, 2, PowerNu(-1, 3)), (5, 3, PowerNu(-1.25, 5))])
def test_monte_carlo_rank0(n, k, prof):
    v = integrate_rank0(n, k, prof)
    mean, se = monte_carlo_rank0(n, k, prof, samples=1 << 19, seed=7)
    assert abs(mean - v.value) <= 3 * se + 1e-3 * abs(v.value)


def test_monte_carlo_is_seeded():
    a = monte_carlo_rank1(3, 2, 2, PowerNu(-1, 3), samples=1 << 14, seed=3)
    b = monte_carlo_rank1(3, 2, 2, PowerNu(-1, 3), samples=1 << 14, seed=3)
    assert a == b


def test_predictions():
    c = ParabolicClass(5, 1, 3, 3)
    assert predicted_verdict(c, SchwartzM(8, 5)) is Prediction.MUST_CONVERGE
    assert predicted_verdict(c, SchwartzM(2, 5)) is Prediction.UNKNOWN
    assert predicted_verdict(c, PowerNu(-1, 5)) is Prediction.UNKNOWN
    c = ParabolicClass(5, 1, 2, 2)
    assert predicted_verdict(c, PowerNu(-1.25, 5)) is Prediction.MUST_DIVERGE
    assert predicted_verdict(c, PowerNu(-2, 5)) is Prediction.UNKNOWN
    assert predicted_verdict(c, SchwartzM(100, 5)) is Prediction.MUST_DIVERGE
    assert predicted_verdict(ParabolicClass(4, 0, 2), PowerNu(-0.9, 4)) is Prediction.MUST_DIVERGE
    with pytest.raises(ValueError):
        predicted_verdict(c, PowerNu(-2, 4))


def test_rejects_mismatched_profile():
    with pytest.raises(ValueError):
        integrate_rank1(5, 3, 3, PowerNu(-2, 4))
    with pytest.raises(ValueError):
        integrate_rank1(5, 4, 3, PowerNu(-2, 5))
