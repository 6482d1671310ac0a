"""Numerically re-derived constants of the power-law rewriting of Gamma.

For ``Gamma(x) = -beta * x**g`` to hold with ``0 < g < 2`` on ``(0, x_max]``,
``beta`` has to lie between the sup of ``-Gamma`` and the inf of
``-Gamma(x) / x**2`` over that interval. Inside that window the shape of
``g(beta; .)`` changes from monotone to having an interior minimum at a
threshold coefficient. Every quantity here is found by a dense log-spaced
grid followed by golden-section refinement.
"""

import math
from dataclasses import dataclass

import numpy as np

from .special_functions import (
    DomainError,
    gamma_exponent,
    gamma_exponent_derivative,
    gamma_fn,
)

__all__ = [
    "AmbiguousClassification",
    "IntervalReport",
    "LimitReport",
    "MonotonicityReport",
    "CoincidenceReport",
    "beta_interval",
    "check_limit_at_zero",
    "classify_gamma_monotonicity",
    "derive_beta_lower",
    "derive_beta_upper",
    "fig2_coincidence",
    "find_monotonicity_threshold",
    "golden_section_min",
]

GRID_POINTS = 10_000
REFINE_TOL = 1e-10
MONOTONE = "MonotoneDecreasing"
INTERIOR_MIN = "InteriorMinimum"

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


class AmbiguousClassification(RuntimeError):
    """The derivative sign pattern does not determine a shape."""


@dataclass(frozen=True)
class IntervalReport:
    lower: float
    upper: float
    x_max: float
    grid_size: int
    refinement_tolerance: float


@dataclass(frozen=True)
class MonotonicityReport:
    beta: float
    classification: str
    minimizer_x: float = None
    x_max: float = None


@dataclass(frozen=True)
class LimitReport:
    beta: float
    x: tuple
    gamma: tuple
    gap: tuple
    gap_shrinks: bool
    expansion_bound: float
    within_expansion_bound: bool


@dataclass(frozen=True)
class CoincidenceReport:
    beta: float
    sup_difference: float
    argmax_x: float


def golden_section_min(fn, lo, hi, tol=REFINE_TOL):
    """Minimize a unimodal ``fn`` on ``[lo, hi]``; returns ``(x, fn(x))``."""
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fn(d)
    candidates = [(fn(x), x) for x in (a, 0.5 * (a + b), b)]
    fx, x = min(candidates)
    return x, fx


def _grid(x_max, points=GRID_POINTS):
    return np.geomspace(x_max * 1e-9, x_max, points)


def _extremum(fn, x_max, maximize):
    sign = -1.0 if maximize else 1.0
    grid = _grid(x_max)
    vals = sign * fn(grid)
    k = int(np.argmin(vals))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, grid.size - 1)]
    _, best = golden_section_min(lambda x: sign * float(fn(x)), lo, hi)
    return sign * min(best, vals[k])


def _check_x_max(x_max):
    if not 0.0 < x_max <= 1.0:
        raise DomainError(f"x_max must lie in (0, 1], got {x_max!r}")


def derive_beta_lower(x_max=0.125):
    """Smallest coefficient for which the exponent stays positive on ``(0, x_max]``.

    That is ``sup (x+1) ln(x+1) - x`` over the interval.
    """
    _check_x_max(x_max)
    return _extremum(lambda x: -gamma_fn(x), x_max, maximize=True)


def derive_beta_upper(x_max=0.125):
    """Largest coefficient for which the exponent stays below 2 on ``(0, x_max]``.

    That is ``inf ((x+1) ln(x+1) - x) / x**2`` over the interval.
    """
    _check_x_max(x_max)
    return _extremum(lambda x: -gamma_fn(x) / (np.asarray(x) ** 2), x_max, maximize=False)


def beta_interval(x_max=0.125):
    return IntervalReport(
        lower=derive_beta_lower(x_max),
        upper=derive_beta_upper(x_max),
        x_max=x_max,
        grid_size=GRID_POINTS,
        refinement_tolerance=REFINE_TOL,
    )


def _classification_grid(x_max):
    # x_max itself is excluded when it is 1 (pole of the exponent)
    top = x_max if x_max < 1.0 else x_max * (1.0 - 1e-6)
    return np.geomspace(top * 1e-9, top, GRID_POINTS)


def classify_gamma_monotonicity(beta, x_max=0.125, check_interval=True):
    """Classify ``x -> gamma_exponent(beta, x)`` on ``(0, x_max]``.

    Uses the sign of the analytic derivative on a dense grid. A switch from
    negative to positive slope is an interior minimum, located by golden
    section on the exponent itself.
    """
    _check_x_max(x_max)
    if check_interval:
        lo, hi = derive_beta_lower(x_max), derive_beta_upper(x_max)
        if not lo < beta < hi:
            raise DomainError(f"beta={beta!r} outside the admissible window ({lo}, {hi})")
    grid = _classification_grid(x_max)
    deriv = gamma_exponent_derivative(beta, grid)
    if np.all(np.abs(deriv) < 1e-12):
        raise AmbiguousClassification(f"derivative vanishes across the grid for beta={beta!r}")
    positive = deriv > 0
    if not positive.any():
        return MonotonicityReport(beta, MONOTONE, None, x_max)
    first = int(np.argmax(positive))
    if first == 0 or not positive[first:].all():
        raise AmbiguousClassification(
            f"derivative sign pattern for beta={beta!r} is not a single minimum"
        )
    x0, _ = golden_section_min(
        lambda x: float(gamma_exponent(beta, x)), grid[first - 1], grid[min(first, grid.size - 1)]
    )
    return MonotonicityReport(beta, INTERIOR_MIN, float(x0), x_max)


def find_monotonicity_threshold(x_max=0.125, tol=1e-10):
    """Coefficient at which the exponent stops being monotone on ``(0, x_max]``.

    Bisection on the classification over the admissible window.
    """
    lo_b, hi_b = derive_beta_lower(x_max), derive_beta_upper(x_max)
    span = hi_b - lo_b
    lo, hi = lo_b + 1e-9 * span, hi_b - 1e-9 * span
    if classify_gamma_monotonicity(lo, x_max).classification != MONOTONE:
        raise AmbiguousClassification("classification at the lower end is not monotone")
    if classify_gamma_monotonicity(hi, x_max).classification != INTERIOR_MIN:
        raise AmbiguousClassification("classification does not flip over the window")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if classify_gamma_monotonicity(mid, x_max).classification == MONOTONE:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def check_limit_at_zero(beta, x_sequence, burn_in=0):
    """Track ``2 - gamma_exponent(beta, x)`` along ``x`` decreasing to 0.

    ``gap_shrinks`` asks for strictly decreasing ``|gap|`` after the first
    ``burn_in`` terms. ``within_expansion_bound`` compares the last gap to
    1.5 times the leading-order term ``ln(1/(2 beta)) / |ln x|``.
    """
    xs = np.asarray(x_sequence, dtype=float)
    if np.any(np.diff(xs) >= 0):
        raise DomainError("x_sequence must be strictly decreasing")
    if xs.min() < 1e-12 or xs.max() >= 1.0:
        raise DomainError("x_sequence must lie in [1e-12, 1)")
    gammas = np.array([gamma_exponent(beta, float(x)) for x in xs])
    gaps = 2.0 - gammas
    tail = np.abs(gaps[burn_in:])
    shrinks = bool(np.all(np.diff(tail) < 0))
    lead = math.log(1.0 / (2.0 * beta)) / abs(math.log(xs[-1]))
    bound = 1.5 * max(lead, 0.0)
    within = bool(gaps[-1] <= bound + 1e-9)
    return LimitReport(
        beta, tuple(xs.tolist()), tuple(gammas.tolist()), tuple(gaps.tolist()),
        shrinks, bound, within,
    )


def fig2_coincidence(beta, x_grid=None):
    """Largest gap between ``exp(Gamma(x/8))`` and ``exp(-beta (x/8)**2)`` on a grid in ``[0, 1]``."""
    xs = np.linspace(0.0, 1.0, 1001) if x_grid is None else np.asarray(x_grid, dtype=float)
    if np.any(xs < 0) or np.any(xs > 1):
        raise DomainError("grid must lie within [0, 1]")
    diff = np.abs(np.exp(gamma_fn(xs / 8.0)) - np.exp(-beta * (xs / 8.0) ** 2))
    k = int(np.argmax(diff))
    return CoincidenceReport(beta, float(diff[k]), float(xs[k]))
