import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bennett_bounds import rates as rt
from bennett_bounds.bounds import BoundedRange
from bennett_bounds.special_functions import DomainError, gamma_exponent

UNIT = BoundedRange(0.0, 1.0)


def test_fit_exact_power_law():
    n = np.geomspace(10, 1e6, 12)
    slope, err = rt.fit_loglog_slope(n, 3.0 * n**-0.37)
    assert slope == pytest.approx(-0.37, abs=1e-12)
    assert err < 1e-10


@given(st.floats(-2.0, 2.0), st.floats(1e-3, 1e3))
def test_fit_recovers_any_slope(s, c):
    n = np.geomspace(1e2, 1e8, 9)
    assert rt.fit_loglog_slope(n, c * n**s)[0] == pytest.approx(s, abs=1e-9)


def test_fit_errors():
    with pytest.raises(DomainError):
        rt.fit_loglog_slope([1, 2, 3], [1, 2, 3])
    with pytest.raises(DomainError):
        rt.fit_loglog_slope([5] * 6, [1, 2, 3, 4, 5, 6])
    with pytest.raises(DomainError):
        rt.fit_loglog_slope([1, 2, 3, 4, 5], [1, 2, 0, 4, 5])


def test_hoeffding_slope():
    curve = rt.radius_curve(rt.hoeffding_inverter(0.05, UNIT, 5.0))
    assert curve.fitted_slope == pytest.approx(-0.5, abs=1e-3)
    assert len(curve.n) == 25


@pytest.mark.parametrize("gamma_exp", [1.6, 1.9])
def test_alt_slope(gamma_exp):
    curve = rt.radius_curve(rt.bennett_alt_inverter(0.05, UNIT, 5.0, 0.4, gamma_exp))
    assert curve.fitted_slope == pytest.approx(-1 / gamma_exp, abs=1e-3)


def test_exact_inversion_drops_saturated_point_and_approaches_half():
    curve = rt.radius_curve(rt.bennett_exact_inverter(0.05, UNIT, 5.0))
    assert curve.dropped and curve.dropped[0][0] == pytest.approx(1e3)
    assert curve.fitted_slope == pytest.approx(-0.5, abs=0.01)
    _, local = rt.local_slopes(curve)
    assert np.all(np.diff(local) > 0)
    assert local[-1] == pytest.approx(-0.5, abs=1e-3)


def test_alt_gamma_outside_window_is_dropped():
    inv = rt.bennett_alt_inverter(0.05, UNIT, 5.0, 0.4, 2.2)
    with pytest.raises(DomainError):
        rt.radius_curve(inv)


def test_local_slopes_of_pure_power():
    n = np.geomspace(1e3, 1e7, 17)
    curve = rt.RateCurve("x", n, n**-0.6, -0.6, 0.0, (n[0], n[-1]))
    mids, slopes = rt.local_slopes(curve)
    assert mids.size == 4
    np.testing.assert_allclose(slopes, -0.6)


def test_large_deviation_profile():
    xs = np.geomspace(1e-6, 0.125, 200)
    low = rt.large_deviation_profile(0.1, xs)
    assert low.minimizer_x is None
    np.testing.assert_allclose(low.gamma, gamma_exponent(0.1, xs))
    np.testing.assert_allclose(low.local_rate, -1 / low.gamma)
    high = rt.large_deviation_profile(0.47, xs)
    assert high.minimizer_x is not None
    with pytest.raises(DomainError):
        rt.large_deviation_profile(0.1, [0.2])


def test_convergence_verdicts():
    ns = [1e2, 1e3, 1e4, 1e5, 1e6]
    good = rt.asymptotic_convergence_check(lambda n: 3 * math.log(n), ns, 0.5, UNIT)
    assert good.verdict == "CONVERGENT"
    # linear growth faster than the exponent rate never vanishes
    bad = rt.asymptotic_convergence_check(lambda n: 0.01 * n, ns, 0.5, UNIT)
    assert bad.verdict == "NON-VANISHING"
    assert not bad.vanishing
    with pytest.raises(DomainError):
        rt.asymptotic_convergence_check(lambda n: 1.0, [10], 0.5, UNIT)
