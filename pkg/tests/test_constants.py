import math

import mpmath
import numpy as np
import pytest

from bennett_bounds import constants as cs
from bennett_bounds.special_functions import DomainError, gamma_exponent

from conftest import mp_gamma

# mpmath references
LOWER_EIGHTH = 0.0075059151134313864  # -Gamma(1/8)
UPPER_EIGHTH = 0.48037856725960873  # -64 Gamma(1/8)
LOWER_ONE = UPPER_ONE = 0.38629436111989062  # 2 ln 2 - 1


def _threshold_reference():
    """Coefficient at which the exponent's slope at x = 1/8 vanishes.

    Below it the exponent decreases all the way to 1/8; above it the
    minimum moves inside. Solved with mpmath from ``d/dx gamma(beta, x) = 0``.
    """
    x = mpmath.mpf(1) / 8

    def slope(beta):
        g = -mp_gamma(x)
        dg = mpmath.log1p(x)
        return (dg / g) * mpmath.log(x) - mpmath.log(g / beta) / x

    return float(mpmath.findroot(slope, 0.44))


def test_interval_endpoints_at_eighth():
    rep = cs.beta_interval(0.125)
    assert rep.lower == pytest.approx(LOWER_EIGHTH, rel=1e-10)
    assert rep.upper == pytest.approx(UPPER_EIGHTH, rel=1e-10)
    assert round(rep.lower, 4) == 0.0075
    assert round(rep.upper, 4) == 0.4804
    assert rep.grid_size == cs.GRID_POINTS


def test_interval_endpoints_at_one():
    assert cs.derive_beta_lower(1.0) == pytest.approx(LOWER_ONE, rel=1e-10)
    assert cs.derive_beta_upper(1.0) == pytest.approx(UPPER_ONE, rel=1e-10)
    assert round(cs.derive_beta_upper(1.0), 4) == 0.3863


@pytest.mark.parametrize("x_max", [0.0, -0.1, 1.5])
def test_x_max_domain(x_max):
    with pytest.raises(DomainError):
        cs.derive_beta_lower(x_max)


def test_endpoints_monotone_in_x_max():
    xs = [0.01, 0.05, 0.125, 0.3, 0.6, 1.0]
    lows = [cs.derive_beta_lower(x) for x in xs]
    ups = [cs.derive_beta_upper(x) for x in xs]
    assert all(np.diff(lows) > 0)
    assert all(np.diff(ups) < 0)
    assert all(lo <= up + 1e-12 for lo, up in zip(lows, ups))


def test_exponent_inside_interval_stays_in_zero_two():
    xs = np.geomspace(1e-9, 0.125, 2000)
    for beta in (0.0076, 0.1, 0.3, 0.48):
        g = gamma_exponent(beta, xs)
        assert np.all(g > 0) and np.all(g < 2)


def test_golden_section():
    x, fx = cs.golden_section_min(lambda t: (t - 0.3) ** 2 + 1.0, 0.0, 1.0)
    assert x == pytest.approx(0.3, abs=1e-7)
    assert fx == pytest.approx(1.0)


def test_classification_examples():
    assert cs.classify_gamma_monotonicity(0.1).classification == cs.MONOTONE
    rep = cs.classify_gamma_monotonicity(0.47)
    assert rep.classification == cs.INTERIOR_MIN
    assert 0 < rep.minimizer_x < 0.125
    xs = np.linspace(rep.minimizer_x * 0.5, 0.125, 500)
    assert np.min(gamma_exponent(0.47, xs)) >= gamma_exponent(0.47, rep.minimizer_x) - 1e-12
    with pytest.raises(DomainError):
        cs.classify_gamma_monotonicity(0.49)


def test_threshold_matches_analytic_reference():
    ref = _threshold_reference()
    found = cs.find_monotonicity_threshold()
    assert found == pytest.approx(ref, abs=1e-8)
    assert round(found, 4) == 0.4434


def test_classification_either_side_of_threshold():
    beta_star = cs.find_monotonicity_threshold()
    for delta in (1e-3, 1e-2):
        assert cs.classify_gamma_monotonicity(beta_star - delta).classification == cs.MONOTONE
        assert cs.classify_gamma_monotonicity(beta_star + delta).classification == cs.INTERIOR_MIN


def test_limit_at_zero():
    rep = cs.check_limit_at_zero(0.1, [1e-4, 1e-6, 1e-8])
    assert rep.gap_shrinks and rep.within_expansion_bound
    assert rep.gap == pytest.approx((0.1747, 0.1165, 0.0874), abs=1e-4)
    for beta in (0.2, 0.3, 0.4):
        assert cs.check_limit_at_zero(beta, [1e-4, 1e-6, 1e-8]).gap_shrinks
    with pytest.raises(DomainError):
        cs.check_limit_at_zero(0.1, [1e-6, 1e-4])


def test_fig2_coincidence():
    near = cs.fig2_coincidence(0.4804)
    far = cs.fig2_coincidence(0.0075)
    assert near.sup_difference < 1e-4
    assert far.sup_difference > 10 * near.sup_difference
    assert far.argmax_x == 1.0
    with pytest.raises(DomainError):
        cs.fig2_coincidence(0.3, [0.5, 1.5])


def test_fig2_gap_direct():
    beta = 0.3
    xs = np.linspace(0, 1, 1001)
    direct = max(
        abs(math.exp(float(mp_gamma(x / 8))) - math.exp(-beta * (x / 8) ** 2)) for x in xs
    )
    assert cs.fig2_coincidence(beta).sup_difference == pytest.approx(direct, rel=1e-10)
