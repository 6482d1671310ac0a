import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bennett_bounds.special_functions import (
    DomainError,
    NumericalReliabilityWarning,
    bernstein_approx,
    gamma_exponent,
    gamma_exponent_derivative,
    gamma_fn,
    gamma_inverse,
)

from conftest import mp_gamma

# mpmath, 50 digits
GAMMA_EIGHTH = -0.0075059151134313864


def test_gamma_fn_closed_forms():
    assert gamma_fn(0.0) == 0.0
    assert gamma_fn(1.0) == pytest.approx(1 - 2 * math.log(2), rel=1e-15)
    assert gamma_fn(0.125) == pytest.approx(GAMMA_EIGHTH, rel=1e-14)


@pytest.mark.parametrize("x", np.geomspace(1e-9, 50.0, 41))
def test_gamma_fn_matches_high_precision(x):
    assert gamma_fn(x) == pytest.approx(float(mp_gamma(x)), rel=1e-13, abs=1e-300)


def test_gamma_fn_array_and_negative_side():
    xs = np.array([-0.5, -1e-3, 0.0, 1e-3, 0.5])
    expected = [float(mp_gamma(x)) for x in xs]
    np.testing.assert_allclose(gamma_fn(xs), expected, rtol=1e-13)


@pytest.mark.parametrize("bad", [-1.0, -2.0, float("nan")])
def test_gamma_fn_domain(bad):
    with pytest.raises(DomainError):
        gamma_fn(bad)


def test_gamma_strictly_decreasing_on_grid():
    xs = np.concatenate([[0.0], np.geomspace(1e-8, 1e3, 2000)])
    vals = gamma_fn(xs)
    assert np.all(np.diff(vals) < 0)
    assert np.all(vals <= 0)


def test_gamma_inverse_examples():
    assert gamma_inverse(0.0) == 0.0
    assert gamma_inverse(1 - 2 * math.log(2)) == pytest.approx(1.0, rel=1e-14)
    assert gamma_inverse(gamma_fn(0.05)) == pytest.approx(0.05, rel=1e-14)


def test_gamma_inverse_domain():
    with pytest.raises(DomainError):
        gamma_inverse(1e-12)


def test_gamma_inverse_round_trip_log_grid():
    for x in np.geomspace(1e-8, 1e3, 400):
        assert abs(gamma_inverse(gamma_fn(x)) - x) <= 1e-10 * x


@given(st.floats(min_value=-1e6, max_value=0.0, allow_subnormal=False))
@settings(max_examples=300)
def test_gamma_inverse_residual(y):
    x = gamma_inverse(y)
    assert x >= 0
    assert abs(gamma_fn(x) - y) <= 1e-12 * max(1.0, abs(y))


def test_gamma_fn_derivative_against_finite_difference():
    from bennett_bounds.special_functions import gamma_fn_derivative

    for x in (1e-3, 0.1, 1.0, 7.0):
        h = 1e-6 * x
        fd = (gamma_fn(x + h) - gamma_fn(x - h)) / (2 * h)
        assert gamma_fn_derivative(x) == pytest.approx(fd, rel=1e-6)


def test_gamma_exponent_examples():
    x = 0.0625
    beta = (x + 1) * math.log1p(x) - x
    assert gamma_exponent(beta, x) == pytest.approx(0.0, abs=1e-12)

    beta2 = -GAMMA_EIGHTH * 64  # ln(1/64) / ln(1/8) = 2
    assert gamma_exponent(beta2, 0.125) == pytest.approx(2.0, abs=1e-12)

    g = gamma_exponent(0.1, 1e-6)
    assert abs(g - 2.0) < 0.2
    # leading-order expansion 2 + ln(1/(2 beta)) / ln x
    assert g == pytest.approx(2 + math.log(5) / math.log(1e-6), abs=1e-5)


@pytest.mark.parametrize("x", [0.0, -0.1, 1.0, 1.5])
def test_gamma_exponent_domain(x):
    with pytest.raises(DomainError):
        gamma_exponent(0.2, x)


def test_gamma_exponent_warns_near_pole():
    with pytest.warns(NumericalReliabilityWarning):
        gamma_exponent(0.3, 1 - 1e-11)


def test_gamma_exponent_quiet_away_from_pole():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        gamma_exponent(0.3, 0.5)


@given(
    st.floats(min_value=1e-3, max_value=2.0),
    st.floats(min_value=1e-8, max_value=0.99),
)
@settings(max_examples=300)
def test_gamma_exponent_solves_defining_equation(beta, x):
    g = gamma_exponent(beta, x)
    assert -beta * x**g == pytest.approx(gamma_fn(x), rel=1e-12)


@given(
    st.floats(min_value=0.0076, max_value=0.4803),
    st.floats(min_value=1e-6, max_value=0.125),
    st.floats(min_value=0.0, max_value=1.0),
)
@settings(max_examples=300)
def test_power_law_chain(beta, x, t):
    g = gamma_exponent(beta, x)
    if not g < 2:
        return
    g_tilde = g + t * (2 - g) * 0.999
    assert gamma_fn(x) <= -beta * x**g_tilde * (1 - 1e-12)
    assert -beta * x**g_tilde < -beta * x**2 or g_tilde == 2


def test_gamma_exponent_derivative_matches_central_difference():
    for beta in (0.1, 0.3, 0.47):
        for x in (1e-4, 0.01, 0.06, 0.12):
            h = 1e-7 * x
            fd = (gamma_exponent(beta, x + h) - gamma_exponent(beta, x - h)) / (2 * h)
            assert gamma_exponent_derivative(beta, x) == pytest.approx(fd, rel=1e-5, abs=1e-6)


def test_bernstein_approx_examples():
    assert bernstein_approx(0.0) == 0.0
    assert bernstein_approx(3.0) == pytest.approx(-9 / 4)
    with pytest.raises(DomainError):
        bernstein_approx(-0.1)


def test_bernstein_dominates_gamma_pointwise():
    for x in np.linspace(0.01, 1.0, 100):
        exact = mp_gamma(x)
        approx = -mpmath.mpf(x) ** 2 / (2 + 2 * mpmath.mpf(x) / 3)
        assert exact <= approx <= 0
        assert gamma_fn(x) <= bernstein_approx(x) <= 0


@given(st.floats(min_value=0.0, max_value=1e4))
def test_bernstein_dominates_gamma_property(x):
    assert gamma_fn(x) <= bernstein_approx(x) + 1e-15 * max(1.0, x * x)
