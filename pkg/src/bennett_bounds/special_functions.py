"""Scalar functions behind the Bennett-type bounds.

``gamma_fn`` is the Bennett exponent ``x - (1 + x) ln(1 + x)``; everything
else in the package is built from it, its numeric inverse, and the exponent
``gamma_exponent`` that rewrites it as a power law ``-beta * x**gamma``.
"""

import math
import warnings

import numpy as np

__all__ = [
    "DomainError",
    "NumericalReliabilityWarning",
    "gamma_fn",
    "gamma_fn_derivative",
    "gamma_inverse",
    "gamma_exponent",
    "gamma_exponent_derivative",
    "bernstein_approx",
]

# Below this |x| the power series is used; 16 terms keep the truncation
# error under one ulp of the leading x**2 / 2 term.
_SERIES_CUTOFF = 0.05
_SERIES_TERMS = 16
_SERIES_COEFFS = np.array(
    [(-1.0) ** (k + 1) / (k * (k - 1)) for k in range(2, 2 + _SERIES_TERMS)]
)


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class NumericalReliabilityWarning(RuntimeWarning):
    """A value was computed but sits next to a singularity."""


def _series(x):
    # sum_{k>=2} (-1)^(k+1) x^k / (k (k-1)), Horner in x, times x**2
    acc = np.zeros_like(x)
    for c in _SERIES_COEFFS[::-1]:
        acc = acc * x + c
    return acc * x * x


def _neg_gamma(x):
    """(1 + x) ln(1 + x) - x, computed without cancellation near 0."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < _SERIES_CUTOFF
    out = np.empty_like(x)
    xs = x[small]
    out[small] = -_series(xs)
    xl = x[~small]
    out[~small] = (1.0 + xl) * np.log1p(xl) - xl
    return out


def _scalar_or_array(out, like):
    if np.ndim(like) == 0:
        return float(out)
    return out


def gamma_fn(x):
    """Bennett exponent ``x - (1 + x) ln(1 + x)``.

    Accepts a float or an array. Nonpositive on ``x >= 0`` and strictly
    decreasing there.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= -1.0) or np.any(np.isnan(arr)):
        raise DomainError(f"gamma_fn needs x > -1, got {x!r}")
    return _scalar_or_array(-_neg_gamma(arr), x)


def gamma_fn_derivative(x):
    """d/dx of ``gamma_fn``, i.e. ``-ln(1 + x)``."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= -1.0):
        raise DomainError(f"gamma_fn_derivative needs x > -1, got {x!r}")
    return _scalar_or_array(-np.log1p(arr), x)


def gamma_inverse(y, rtol=1e-13, max_doublings=2000):
    """Unique ``x >= 0`` with ``gamma_fn(x) == y``, for ``y <= 0``.

    Brackets by doubling, bisects to a relative width of ``rtol``, then
    polishes with two Newton steps kept inside the bracket.
    """
    y = float(y)
    if math.isnan(y) or y > 0.0:
        raise DomainError(f"gamma_inverse needs y <= 0, got {y!r}")
    if y == 0.0:
        return 0.0

    lo, hi = 0.0, 1.0
    for _ in range(max_doublings):
        if gamma_fn(hi) <= y:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise DomainError(f"could not bracket gamma_inverse({y!r})")

    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if gamma_fn(mid) > y:
            lo = mid
        else:
            hi = mid

    x = 0.5 * (lo + hi)
    for _ in range(2):
        slope = -math.log1p(x)
        if slope == 0.0:
            break
        step = (gamma_fn(x) - y) / slope
        candidate = x - step
        if lo <= candidate <= hi:
            x = candidate
    return x


def gamma_exponent(beta, x):
    """Exponent ``g`` solving ``gamma_fn(x) == -beta * x**g``.

    Equals ``ln(((x+1) ln(x+1) - x) / beta) / ln(x)`` on ``0 < x < 1``.
    Close to ``x = 1`` the value is returned with a
    ``NumericalReliabilityWarning`` since ``ln x`` vanishes there.
    """
    if beta <= 0:
        raise DomainError(f"beta must be positive, got {beta!r}")
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise DomainError(f"gamma_exponent needs 0 < x < 1, got {x!r}")
    log_x = np.log(arr)
    if np.any(np.abs(log_x) < 1e-9):
        warnings.warn(
            "gamma_exponent evaluated within 1e-9 of the pole at x = 1",
            NumericalReliabilityWarning,
            stacklevel=2,
        )
    out = np.log(_neg_gamma(arr) / beta) / log_x
    return _scalar_or_array(out, x)


def gamma_exponent_derivative(beta, x):
    """Analytic x-derivative of ``gamma_exponent`` (quotient rule)."""
    if beta <= 0:
        raise DomainError(f"beta must be positive, got {beta!r}")
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise DomainError(f"gamma_exponent_derivative needs 0 < x < 1, got {x!r}")
    g = _neg_gamma(arr)
    log_x = np.log(arr)
    num = np.log1p(arr) / g * log_x - np.log(g / beta) / arr
    return _scalar_or_array(num / log_x**2, x)


def bernstein_approx(x):
    """Bernstein relaxation ``-x**2 / (2 + 2x/3)`` of ``gamma_fn``.

    Satisfies ``gamma_fn(x) <= bernstein_approx(x) <= 0`` for ``x >= 0``.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0) or np.any(np.isnan(arr)):
        raise DomainError(f"bernstein_approx needs x >= 0, got {x!r}")
    out = -(arr * arr) / (2.0 + 2.0 * arr / 3.0)
    return _scalar_or_array(out, x)
