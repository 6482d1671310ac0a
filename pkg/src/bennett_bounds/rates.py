"""Convergence rates of the bound radii as the sample count grows.

A rate is the OLS slope of ``ln xi`` against ``ln N`` over a finite window.
"""

import math
import warnings
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .bounds import (
    PreconditionWarning,
    bennett_alt_radius,
    bennett_uen_radius_exact,
    bernstein_uen_radius,
    hoeffding_uen_radius,
)
from .special_functions import DomainError, gamma_exponent, gamma_fn

__all__ = [
    "ConvergenceReport",
    "Inverter",
    "RateCurve",
    "asymptotic_convergence_check",
    "bennett_alt_inverter",
    "bennett_exact_inverter",
    "bernstein_inverter",
    "default_n_grid",
    "fit_loglog_slope",
    "hoeffding_inverter",
    "large_deviation_profile",
    "local_slopes",
    "radius_curve",
]

MIN_FIT_POINTS = 5


@dataclass(frozen=True)
class Inverter:
    """A radius function of N with everything else held fixed."""

    family: str
    radius: callable
    range_width: float = None

    def __call__(self, n):
        return self.radius(n)


def hoeffding_inverter(eps, range_, log_uen):
    return Inverter("HoeffdingUEN", partial(_by_n, hoeffding_uen_radius, eps, range_, log_uen), range_.width())


def bernstein_inverter(eps, range_, log_uen):
    return Inverter("BernsteinAltUEN", partial(_by_n, bernstein_uen_radius, eps, range_, log_uen), range_.width())


def bennett_exact_inverter(eps, range_, log_uen):
    return Inverter("BennettUEN", partial(_by_n, bennett_uen_radius_exact, eps, range_, log_uen), range_.width())


def bennett_alt_inverter(eps, range_, log_uen, beta1, gamma_exp):
    fn = partial(_alt_by_n, eps, range_, log_uen, beta1, gamma_exp)
    return Inverter(f"BennettAltUEN(beta1={beta1:g},gamma={gamma_exp:g})", fn, range_.width())


def _by_n(fn, eps, range_, log_uen, n):
    return fn(eps, n, range_, log_uen)


def _alt_by_n(eps, range_, log_uen, beta1, gamma_exp, n):
    return bennett_alt_radius(eps, n, range_, log_uen, beta1, gamma_exp)


@dataclass
class RateCurve:
    family: str
    n: np.ndarray
    xi: np.ndarray
    fitted_slope: float
    slope_stderr: float
    fit_range: tuple
    dropped: list = field(default_factory=list)

    @property
    def points(self):
        return list(zip(self.n.tolist(), self.xi.tolist()))


def default_n_grid(n_min=1e3, n_max=1e9, points=25):
    return np.geomspace(n_min, n_max, points)


def fit_loglog_slope(n, xi):
    """OLS slope of ``ln xi`` on ``ln n``; returns ``(slope, stderr)``."""
    n = np.asarray(n, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if n.size < MIN_FIT_POINTS:
        raise DomainError(f"need at least {MIN_FIT_POINTS} points, got {n.size}")
    if n.shape != xi.shape or not (np.all(n > 0) and np.all(xi > 0)):
        raise DomainError("n and xi must be equal-length and positive")
    ln_n, ln_xi = np.log(n), np.log(xi)
    if not (np.all(np.isfinite(ln_n)) and np.all(np.isfinite(ln_xi))):
        raise DomainError("all points must be positive and finite")
    dn = ln_n - ln_n.mean()
    sxx = float(dn @ dn)
    if sxx <= 1e-300 * ln_n.size:
        raise DomainError("degenerate fit: all N are equal")
    slope = float(dn @ (ln_xi - ln_xi.mean())) / sxx
    resid = ln_xi - ln_xi.mean() - slope * dn
    s2 = float(resid @ resid) / (ln_n.size - 2)
    return slope, math.sqrt(s2 / sxx)


def radius_curve(inverter, n_grid=None):
    """Radii of ``inverter`` along ``n_grid`` with a fitted log-log slope.

    Points where the inverter raises a domain error, warns about a violated
    precondition, or where ``N < 8 (b-a)^2 / xi^2`` are dropped and listed
    in ``dropped`` as ``(N, reason)``.
    """
    n_grid = default_n_grid() if n_grid is None else np.asarray(n_grid, dtype=float)
    kept_n, kept_xi, dropped = [], [], []
    for n in n_grid:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", PreconditionWarning)
            try:
                xi = inverter(n)
            except DomainError as exc:
                dropped.append((float(n), str(exc)))
                continue
        flagged = [str(w.message) for w in caught if issubclass(w.category, PreconditionWarning)]
        if flagged:
            dropped.append((float(n), "; ".join(flagged)))
            continue
        width = inverter.range_width
        if width is not None and n < 8.0 * width**2 / xi**2:
            dropped.append((float(n), "N below 8(b-a)^2/xi^2"))
            continue
        kept_n.append(float(n))
        kept_xi.append(float(xi))
    if len(kept_n) < MIN_FIT_POINTS:
        raise DomainError(
            f"{inverter.family}: only {len(kept_n)} valid points, need {MIN_FIT_POINTS}"
        )
    slope, err = fit_loglog_slope(kept_n, kept_xi)
    return RateCurve(
        inverter.family,
        np.array(kept_n),
        np.array(kept_xi),
        slope,
        err,
        (kept_n[0], kept_n[-1]),
        dropped,
    )


def local_slopes(curve, per=1.0):
    """Slopes between points spaced ``per`` decades apart (nearest grid match).

    Returns ``(decade_midpoints, slopes)``.
    """
    ln_n = np.log10(curve.n)
    mids, slopes = [], []
    start = ln_n[0]
    while start + per <= ln_n[-1] + 1e-9:
        i = int(np.argmin(np.abs(ln_n - start)))
        j = int(np.argmin(np.abs(ln_n - (start + per))))
        if j > i:
            slope = math.log(curve.xi[j] / curve.xi[i]) / math.log(curve.n[j] / curve.n[i])
            mids.append(0.5 * (ln_n[i] + ln_n[j]))
            slopes.append(slope)
        start += per
    return np.array(mids), np.array(slopes)


@dataclass
class DeviationProfile:
    beta: float
    x: np.ndarray
    gamma: np.ndarray
    local_rate: np.ndarray
    minimizer_x: float = None


def large_deviation_profile(beta1, x_grid):
    """Table of ``(x, gamma_exponent(beta1, x), -1/gamma)`` over ``x_grid`` in ``(0, 1/8]``.

    ``minimizer_x`` is the grid point with the smallest exponent when it is
    interior to the grid, else ``None``.
    """
    xs = np.asarray(x_grid, dtype=float)
    if np.any(xs <= 0) or np.any(xs > 0.125):
        raise DomainError("x_grid must lie in (0, 1/8]")
    if beta1 <= 0:
        raise DomainError("beta1 must be positive")
    g = gamma_exponent(beta1, xs)
    k = int(np.argmin(g))
    x0 = float(xs[k]) if 0 < k < xs.size - 1 else None
    return DeviationProfile(beta1, xs, g, -1.0 / g, x0)


@dataclass
class ConvergenceReport:
    n: np.ndarray
    ratio: np.ndarray
    log_bound: np.ndarray
    gamma_rate: float
    ratio_bounded: bool
    vanishing: bool
    verdict: str


def asymptotic_convergence_check(uen_growth, n_grid, xi, range_, vanish_log_tol=math.log(1e-6)):
    """Diagnose whether the Bennett UEN tail at fixed ``xi`` goes to zero.

    Reports ``log_uen(N)/N`` and the log of the raw bound. The verdict is
    ``CONVERGENT`` when the ratio does not grow over the second half of the
    grid and the bound ends below ``exp(vanish_log_tol)`` while decreasing,
    else ``NON-VANISHING``. A numerical diagnostic, not a proof.
    """
    ns = np.asarray(n_grid, dtype=float)
    if ns.size < 2 or np.any(np.diff(ns) <= 0):
        raise DomainError("n_grid must be increasing with at least two points")
    w = range_.width()
    rate = abs(gamma_fn(xi / (8.0 * w)))
    logs = np.array([float(uen_growth(n)) for n in ns])
    ratio = logs / ns
    # log of 8 N_1 exp(N Gamma), kept in log space to avoid underflow
    log_bound = math.log(8.0) + logs - ns * rate
    half = ns.size // 2
    ratio_bounded = bool(ratio[half:].max() <= ratio[: half + 1].max() * (1 + 1e-9) + 1e-300)
    tail = log_bound[half:]
    vanishing = bool(np.all(np.diff(tail) < 0) and tail[-1] < vanish_log_tol)
    verdict = "CONVERGENT" if ratio_bounded and vanishing else "NON-VANISHING"
    return ConvergenceReport(ns, ratio, log_bound, rate, ratio_bounded, vanishing, verdict)

