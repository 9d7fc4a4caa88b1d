import math

import pytest

from cuspidal.hc import (
    HcError,
    HcSeries,
    cauchy_gaps,
    check_f_identity,
    decay_check,
    dual_class_limit,
    gaps_shrink,
    hc_integral,
    hc_point,
    hc_series,
    hc_value,
    limit_rhs,
)
from cuspidal.integrate import Verdict, integrate_rank0, integrate_rank1
from cuspidal.profiles import PowerNu, SchwartzM

P3 = PowerNu(-1, 3)


def test_identity_at_s_zero():
    assert hc_value(3, 2, P3, 0.0) == pytest.approx(integrate_rank1(3, 2, 2, P3).value, rel=1e-9)


def test_incompatible_class_rejected():
    with pytest.raises(HcError):
        hc_value(4, 2, PowerNu(-1, 4), 0.0)
    with pytest.raises(HcError):
        HcSeries(5, 2, PowerNu(-2, 5))


def test_prefactor_is_pure_refactoring():
    for s in (-3.0, 1.5, 6.0):
        v = hc_integral(3, 2, P3, s)
        assert hc_value(3, 2, P3, s) == math.exp(s) * v.value


def test_linearity_in_the_profile():
    q = SchwartzM(8, 5)
    assert hc_value(5, 3, q.scaled(3.5), 2.0) == pytest.approx(3.5 * hc_value(5, 3, q, 2.0), rel=1e-12)


def test_identity_defect_is_recorded():
    for s in (-6.0, 0.0, 8.0):
        v = hc_integral(3, 2, P3, s)
        assert v.details["identity_defect"] <= 1e-9


def test_identity_check_raises():
    with pytest.raises(AssertionError):
        check_f_identity(1.0, 1.0, 1.0)


def test_decay_example_negative_side():
    q = SchwartzM(8, 4)
    assert abs(hc_value(4, 3, q, -4.0)) < abs(hc_value(4, 3, q, -2.0))


def test_limit_example_n3():
    assert hc_value(3, 2, P3, 6.0) == pytest.approx(hc_value(3, 2, P3, 8.0), rel=0.02)


def test_limit_rhs_scaling_of_rank0_integral():
    lim, err = limit_rhs(3, P3)
    r0 = integrate_rank0(3, 2, P3).value
    assert lim == pytest.approx(2 * r0, rel=1e-12)
    assert lim > 0 and err < 1e-4
    lim5, _ = limit_rhs(5, SchwartzM(8, 5))
    assert lim5 == pytest.approx(4 * integrate_rank0(5, 3, SchwartzM(8, 5)).value, rel=1e-12)


def test_limit_rhs_rejects_even_n():
    with pytest.raises(HcError):
        limit_rhs(4, PowerNu(-1, 4))


def test_limit_rhs_divergent_case():
    with pytest.raises(HcError) as info:
        limit_rhs(5, PowerNu(-1, 5))
    assert info.value.status is Verdict.DIVERGENT


def test_transform_of_nonschwartz_power_diverges_for_n5():
    v = hc_integral(5, 3, PowerNu(-1, 5), 0.0)
    assert v.status is Verdict.DIVERGENT


@pytest.mark.parametrize("n,prof", [(3, PowerNu(-1, 3)), (3, SchwartzM(8, 3)), (5, SchwartzM(8, 5))])
def test_dual_classes_share_the_limit(n, prof):
    rep = dual_class_limit(n, prof, s=8.0)
    assert rep.rel_dual < 0.02
    assert all(r < 0.02 for r in rep.rel_limit.values())


def test_series_and_gaps():
    series = hc_series(3, 2, P3, [4, 5, 6, 7, 8])
    gaps = cauchy_gaps(series)
    assert len(gaps) == 4 and gaps_shrink(gaps)
    assert list(series.s) == [4, 5, 6, 7, 8]
    assert all(e > 0 for e in series.errors)


def test_decay_check_even_n_both_sides():
    rep = decay_check(4, 3, SchwartzM(10, 4), list(range(-6, 7)), N=2)
    assert rep.sides == {"negative": True, "positive": True}
    assert abs(rep.argmax_s["negative"]) <= 2 and abs(rep.argmax_s["positive"]) <= 2
    vals = dict(zip(rep.series.s, abs(rep.series.values)))
    assert max(vals[s] for s in (4, 5, 6)) <= 0.1 * max(vals[s] for s in (0, 1, 2))


def test_decay_check_odd_n():
    rep = decay_check(3, 2, P3, list(range(-6, 9)), N=2)
    assert rep.sides == {"negative": True}
    assert rep.gaps_decreasing
    assert rep.limit_gaps[-1][1] < 1e-5


def test_decay_check_requires_both_signs():
    with pytest.raises(ValueError):
        decay_check(3, 2, P3, [1, 2, 3])


def test_point_error_scales_with_prefactor():
    v, e = hc_point(3, 2, P3, 4.0)
    assert e > 0 and e < 1e-4 * v
