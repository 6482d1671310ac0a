"""Tail bounds (deviation -> probability) and their inversions (confidence -> radius).

Every tail function returns a :class:`BoundResult` that keeps the raw value,
which may exceed 1, next to the value clipped to a probability. Radius
functions return floats and emit :class:`PreconditionWarning` when a
parameter falls outside the regime in which the bound is proved.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .special_functions import DomainError, bernstein_approx, gamma_fn, gamma_inverse

__all__ = [
    "BETA1_INTERVAL",
    "BETA2_INTERVAL",
    "BoundFamily",
    "BoundResult",
    "BoundedRange",
    "PreconditionWarning",
    "SaturationError",
    "UenValue",
    "hoeffding_uen_tail",
    "hoeffding_uen_radius",
    "bennett_sum_tail",
    "bennett_bdiff_tail",
    "bennett_uen_tail",
    "bennett_uen_radius_exact",
    "bernstein_uen_radius",
    "bernstein_uen_tail",
    "bernstein_relaxed_uen_radius",
    "bennett_alt_radius",
    "bennett_alt_uen_tail",
    "rademacher_bound_classical",
    "rademacher_bound_bennett",
    "rad_population_from_empirical",
    "dudley_upper_bound",
    "sudakov_shape_diagnostic",
]

# Published coefficient intervals; values outside are flagged, not rejected.
BETA1_INTERVAL = (0.0075, 0.4804)
BETA2_INTERVAL = (0.0075, 0.3863)


class PreconditionWarning(UserWarning):
    """A bound was evaluated outside the conditions under which it holds."""


class SaturationError(DomainError):
    """The requested confidence needs a deviation larger than the range."""

    def __init__(self, message, saturated_radius):
        super().__init__(message)
        self.saturated_radius = saturated_radius


class BoundFamily:
    HOEFFDING_UEN = "HoeffdingUEN"
    BENNETT_SUM = "BennettSum"
    BENNETT_BDIFF = "BennettBdiff"
    BENNETT_UEN = "BennettUEN"
    BERNSTEIN_ALT_UEN = "BernsteinAltUEN"
    BENNETT_ALT_UEN = "BennettAltUEN"
    RADEMACHER_CLASSICAL = "RademacherClassical"
    RADEMACHER_BENNETT = "RademacherBennett"


@dataclass(frozen=True)
class BoundedRange:
    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)) or not self.a < self.b:
            raise DomainError(f"need finite a < b, got [{self.a}, {self.b}]")

    def width(self):
        return self.b - self.a


@dataclass(frozen=True)
class UenValue:
    """Log uniform entropy number ``ln N_1(F, xi/8, 2N)``."""

    log_uen: float
    source: str = "user-supplied"

    def __post_init__(self):
        if not self.log_uen >= 0.0:
            raise DomainError(f"log_uen must be >= 0, got {self.log_uen}")
        if self.source not in ("measured", "analytic", "user-supplied"):
            raise ValueError(f"unknown uen source {self.source!r}")


@dataclass(frozen=True)
class BoundResult:
    value: float
    value_raw: float
    family: str
    valid: bool = True
    notes: tuple = field(default=())


def _as_uen(uen):
    return uen if isinstance(uen, UenValue) else UenValue(float(uen))


def _probability(raw, family, problems):
    return BoundResult(
        value=min(raw, 1.0),
        value_raw=raw,
        family=family,
        valid=not problems,
        notes=tuple(problems),
    )


def _check_eps(eps):
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps!r}")


def _check_n(n):
    if n < 1:
        raise DomainError(f"sample count must be >= 1, got {n!r}")


def _warn(problems):
    for p in problems:
        warnings.warn(p, PreconditionWarning, stacklevel=3)


def _sample_size_problem(xi, n, width):
    if xi <= 0 or n < 8.0 * width**2 / xi**2:
        return [f"N={n} below 8(b-a)^2/xi^2 for xi={xi!r}"]
    return []


# -- UEN-based bounds ---------------------------------------------------------


def hoeffding_uen_tail(xi, n, range_, uen):
    """``8 N_1 exp(-N xi^2 / (32 (b-a)^2))``."""
    _check_n(n)
    uen = _as_uen(uen)
    w = range_.width()
    problems = _sample_size_problem(xi, n, w)
    raw = 8.0 * math.exp(uen.log_uen - n * xi * xi / (32.0 * w * w))
    return _probability(raw, BoundFamily.HOEFFDING_UEN, problems)


def hoeffding_uen_radius(eps, n, range_, uen):
    """Deviation at which the Hoeffding UEN tail equals ``eps``."""
    _check_eps(eps)
    _check_n(n)
    uen = _as_uen(uen)
    log_term = uen.log_uen - math.log(eps / 8.0)
    return range_.width() * math.sqrt(32.0 * log_term / n)


def bennett_sum_tail(xi, n, range_):
    """Two-sided tail ``2 exp(N Gamma(xi / (N (b-a))))`` for a sum of N draws."""
    _check_n(n)
    w = range_.width()
    if not 0.0 < xi < n * w:
        raise DomainError(f"need 0 < xi < N(b-a) = {n * w}, got {xi!r}")
    raw = 2.0 * math.exp(n * gamma_fn(xi / (n * w)))
    return _probability(raw, BoundFamily.BENNETT_SUM, [])


def bennett_bdiff_tail(xi, n, c):
    """One-sided tail ``exp(N Gamma(xi / (N c)))`` under bounded differences ``c``."""
    _check_n(n)
    if not c > 0:
        raise DomainError(f"bounded-difference constant must be positive, got {c!r}")
    if not xi > 0:
        raise DomainError(f"xi must be positive, got {xi!r}")
    raw = math.exp(n * gamma_fn(xi / (n * c)))
    return _probability(raw, BoundFamily.BENNETT_BDIFF, [])


def bennett_uen_tail(xi, n, range_, uen):
    """``8 N_1 exp(N Gamma(xi / (8 (b-a))))``; flags xi > b-a and small N."""
    _check_n(n)
    uen = _as_uen(uen)
    w = range_.width()
    problems = _sample_size_problem(xi, n, w)
    if xi > w:
        problems.append(f"xi={xi!r} exceeds b-a={w!r}")
    raw = 8.0 * math.exp(uen.log_uen + n * gamma_fn(max(xi, 0.0) / (8.0 * w)))
    return _probability(raw, BoundFamily.BENNETT_UEN, problems)


def bennett_uen_radius_exact(eps, n, range_, uen, cap=True):
    """Invert the Bennett UEN tail numerically.

    Returns ``8 (b-a) gamma_inverse((ln(eps/8) - log_uen) / N)``. With
    ``cap`` set, a radius beyond ``b - a`` raises :class:`SaturationError`.
    """
    _check_n(n)
    uen = _as_uen(uen)
    if not 0.0 < eps:
        raise DomainError(f"eps must be positive, got {eps!r}")
    y = (math.log(eps / 8.0) - uen.log_uen) / n
    if y > 0.0:
        raise DomainError(f"eps={eps!r} exceeds 8 exp(log_uen); no radius exists")
    w = range_.width()
    x = gamma_inverse(y)
    if cap and x > 0.125:
        raise SaturationError(
            f"eps={eps!r} at N={n} needs xi > b-a; saturated at {w!r}", saturated_radius=w
        )
    return 8.0 * w * x


def bernstein_uen_radius(eps, n, range_, uen):
    """Closed-form Bernstein-type radius ``4(b-a)L/(3N) + (b-a) sqrt(2L/N)``.

    ``L = log_uen - ln(eps/8)``. Implemented exactly as the published
    formula; note it is not a relaxation of :func:`bennett_uen_tail` (see
    :func:`bernstein_relaxed_uen_radius` for one that is).
    """
    _check_eps(eps)
    _check_n(n)
    uen = _as_uen(uen)
    w = range_.width()
    log_term = uen.log_uen - math.log(eps / 8.0)
    return 4.0 * w * log_term / (3.0 * n) + w * math.sqrt(2.0 * log_term) / math.sqrt(n)


def bernstein_uen_tail(xi, n, range_, uen):
    """Confidence level implied by :func:`bernstein_uen_radius` at deviation ``xi``.

    Solves the radius formula, a quadratic in ``sqrt(L)``, for ``L``.
    """
    _check_n(n)
    uen = _as_uen(uen)
    w = range_.width()
    qa = 4.0 * w / (3.0 * n)
    qb = w * math.sqrt(2.0 / n)
    s = 2.0 * xi / (qb + math.sqrt(qb * qb + 4.0 * qa * xi))
    raw = 8.0 * math.exp(uen.log_uen - s * s)
    return _probability(raw, BoundFamily.BERNSTEIN_ALT_UEN, [])


def bernstein_relaxed_uen_radius(eps, n, range_, uen):
    """Radius from the Bennett UEN tail with Gamma replaced by its Bernstein relaxation.

    Solves ``N x^2 / (2 + 2x/3) = L`` exactly and scales by ``8 (b-a)``;
    always at least :func:`bennett_uen_radius_exact` (uncapped).
    """
    _check_eps(eps)
    _check_n(n)
    uen = _as_uen(uen)
    log_term = uen.log_uen - math.log(eps / 8.0)
    r = log_term / (3.0 * n)
    x = r + math.sqrt(r * r + 2.0 * log_term / n)
    return 8.0 * range_.width() * x


def _alt_problems(beta, gamma_exp, interval, name):
    problems = []
    if not 0.0 < gamma_exp < 2.0:
        problems.append(f"gamma={gamma_exp!r} outside (0, 2); the faster-rate bound is void")
    lo, hi = interval
    if not lo < beta < hi:
        problems.append(f"{name}={beta!r} outside ({lo}, {hi})")
    return problems


def bennett_alt_radius(eps, n, range_, uen, beta1, gamma_exp):
    """Power-law radius ``8(b-a) (L / (beta1 N))**(1/gamma)``."""
    _check_eps(eps)
    _check_n(n)
    if beta1 <= 0 or gamma_exp <= 0:
        raise DomainError("beta1 and gamma must be positive")
    uen = _as_uen(uen)
    _warn(_alt_problems(beta1, gamma_exp, BETA1_INTERVAL, "beta1"))
    log_term = uen.log_uen - math.log(eps / 8.0)
    return 8.0 * range_.width() * (log_term / (beta1 * n)) ** (1.0 / gamma_exp)


def bennett_alt_uen_tail(xi, n, range_, uen, beta1, gamma_exp):
    """``8 N_1 exp(-N beta1 (xi / (8(b-a)))**gamma)``, forward of :func:`bennett_alt_radius`."""
    _check_n(n)
    uen = _as_uen(uen)
    problems = _alt_problems(beta1, gamma_exp, BETA1_INTERVAL, "beta1")
    x = xi / (8.0 * range_.width())
    raw = 8.0 * math.exp(uen.log_uen - n * beta1 * x**gamma_exp)
    return _probability(raw, BoundFamily.BENNETT_ALT_UEN, problems)


# -- Rademacher-based bounds --------------------------------------------------


def rademacher_bound_classical(emp_risk, rad, emp_rad, n, range_, eps, use_empirical=False):
    """Upper bound on the expected risk from Rademacher complexity (Hoeffding-type).

    ``E_N f + 2R + (b-a) sqrt(ln(1/eps)/N)``, or with ``use_empirical``
    ``E_N f + 2R_N + 3(b-a) sqrt(ln(2/eps)/(2N))``.
    """
    _check_eps(eps)
    _check_n(n)
    w = range_.width()
    if use_empirical:
        return emp_risk + 2.0 * emp_rad + 3.0 * w * math.sqrt(math.log(2.0 / eps) / (2.0 * n))
    return emp_risk + 2.0 * rad + w * math.sqrt(math.log(1.0 / eps) / n)


def rademacher_bound_bennett(
    emp_risk, rad, emp_rad, n, range_, eps, beta2, gamma_exp, use_empirical=False
):
    """Bennett-type counterpart of :func:`rademacher_bound_classical`.

    The deviation term is ``(b-a) (ln(1/eps) / (beta2 N))**(1/gamma)``; the
    empirical variant uses coefficient 3 and ``ln(2/eps)``.
    """
    _check_eps(eps)
    _check_n(n)
    if beta2 <= 0 or gamma_exp <= 0:
        raise DomainError("beta2 and gamma must be positive")
    _warn(_alt_problems(beta2, gamma_exp, BETA2_INTERVAL, "beta2"))
    w = range_.width()
    if use_empirical:
        dev = 3.0 * w * (math.log(2.0 / eps) / (beta2 * n)) ** (1.0 / gamma_exp)
        return emp_risk + 2.0 * emp_rad + dev
    dev = w * (math.log(1.0 / eps) / (beta2 * n)) ** (1.0 / gamma_exp)
    return emp_risk + 2.0 * rad + dev


def rad_population_from_empirical(
    emp_rad, n, range_, eps, family="hoeffding", beta2=None, gamma_exp=None
):
    """Upper bound on the population Rademacher complexity from the empirical one."""
    _check_eps(eps)
    _check_n(n)
    w = range_.width()
    if family == "hoeffding":
        return emp_rad + w * math.sqrt(math.log(2.0 / eps) / (2.0 * n))
    if family == "bennett":
        if beta2 is None or gamma_exp is None:
            raise ValueError("bennett family needs beta2 and gamma_exp")
        if beta2 <= 0 or gamma_exp <= 0:
            raise DomainError("beta2 and gamma must be positive")
        _warn(_alt_problems(beta2, gamma_exp, BETA2_INTERVAL, "beta2"))
        return emp_rad + w * (math.log(2.0 / eps) / (beta2 * n)) ** (1.0 / gamma_exp)
    raise ValueError(f"unknown family {family!r}")


# -- chaining ------------------------------------------------------------------


def _check_nonincreasing(covering_log_fn, grid):
    vals = np.array([covering_log_fn(x) for x in grid], dtype=float)
    if np.any(vals < 0) or np.any(np.diff(vals) > 1e-12):
        raise DomainError("covering_log_fn must be nonnegative and nonincreasing")
    return vals


def dudley_upper_bound(covering_log_fn, n, xi_max, eps_grid=None):
    """Entropy-integral upper bound on the empirical Rademacher complexity.

    ``min over eps in eps_grid of 4 eps + 12 int_eps^xi_max sqrt(ln N(xi) / N) dxi``.
    ``covering_log_fn`` must vanish beyond ``xi_max``. The integral is done
    by adaptive quadrature between consecutive grid points.
    """
    _check_n(n)
    if not xi_max > 0:
        raise DomainError(f"xi_max must be positive, got {xi_max!r}")
    if eps_grid is None:
        eps_grid = np.geomspace(min(1e-4, xi_max), xi_max, 64)
    eps_grid = np.unique(np.asarray(eps_grid, dtype=float))
    if np.any(eps_grid <= 0):
        raise DomainError("eps_grid must be positive")
    nodes = np.unique(np.concatenate([eps_grid[eps_grid < xi_max], [xi_max]]))
    _check_nonincreasing(covering_log_fn, np.geomspace(nodes[0], nodes[-1], 256))

    def integrand(xi):
        return math.sqrt(max(covering_log_fn(xi), 0.0) / n)

    pieces = [
        integrate.quad(integrand, lo, hi, limit=200)[0] for lo, hi in zip(nodes[:-1], nodes[1:])
    ]
    tails = np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]])
    tail_at = dict(zip(nodes, tails))
    return min(4.0 * e + 12.0 * tail_at.get(e, 0.0) for e in eps_grid)


def sudakov_shape_diagnostic(covering_log_fn, n, alpha_grid):
    """Unnormalized lower-bound shape ``sup_alpha alpha sqrt(ln N(alpha)/N) / ln N``.

    The absolute constant is unknown, so this is taken as 1 and the result
    is only meaningful up to scale. It is never compared to a complexity.
    """
    _check_n(n)
    if n < 2:
        raise DomainError("shape diagnostic needs N >= 2 (divides by ln N)")
    best = max(a * math.sqrt(max(covering_log_fn(a), 0.0) / n) for a in alpha_grid)
    return best / math.log(n)
