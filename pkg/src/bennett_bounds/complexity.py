"""Complexity measures of finite function classes.

A class restricted to a sample is an :class:`EvaluationMatrix`: row ``i``
holds ``f_i(z_1), ..., f_i(z_N)``. Distances use the empirical l_p metric,
normalized by ``1/N`` unless asked otherwise, and covers take their centers
from the rows themselves.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .bounds import BoundedRange
from .special_functions import DomainError

__all__ = [
    "CoverResult",
    "EvaluationMatrix",
    "covering_log_function",
    "covering_number_exact",
    "covering_number_greedy",
    "diameter",
    "empirical_lp_distance",
    "rademacher_exact",
    "rademacher_expected_mc",
    "rademacher_mc",
    "read_matrix_csv",
    "uen_estimate",
]

EXACT_COVER_MAX_ROWS = 22
RADEMACHER_EXACT_MAX_N = 20


@dataclass(frozen=True)
class EvaluationMatrix:
    values: np.ndarray
    range: BoundedRange

    def __post_init__(self):
        vals = np.array(self.values, dtype=float, ndmin=2)
        if vals.ndim != 2 or vals.shape[0] < 1 or vals.shape[1] < 1:
            raise DomainError(f"need a non-empty M x N matrix, got shape {vals.shape}")
        if np.any(vals < self.range.a) or np.any(vals > self.range.b):
            raise DomainError(f"entries must lie in [{self.range.a}, {self.range.b}]")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def shape(self):
        return self.values.shape


@dataclass(frozen=True)
class CoverResult:
    size: int
    method: str
    radius: float
    metric_p: float
    centers: tuple = ()


def _rows(matrix):
    return matrix.values if isinstance(matrix, EvaluationMatrix) else np.asarray(matrix, float)


def empirical_lp_distance(row_i, row_j, p, normalized=True):
    """``((1/N) sum |f_i - f_j|^p)^(1/p)``; drop the ``1/N`` with ``normalized=False``."""
    u = np.asarray(row_i, dtype=float)
    v = np.asarray(row_j, dtype=float)
    if u.shape != v.shape:
        raise DomainError(f"row length mismatch: {u.shape} vs {v.shape}")
    if not p > 0:
        raise DomainError(f"p must be positive, got {p!r}")
    s = np.sum(np.abs(u - v) ** p)
    if normalized:
        s /= u.size
    return float(s ** (1.0 / p))


def _pairwise(values, p, normalized=True):
    diff = np.abs(values[:, None, :] - values[None, :, :]) ** p
    s = diff.mean(axis=2) if normalized else diff.sum(axis=2)
    return s ** (1.0 / p)


def diameter(matrix, p=2.0, normalized=True):
    return float(_pairwise(_rows(matrix), p, normalized).max())


def covering_number_greedy(matrix, radius, p=1.0, normalized=True):
    """Farthest-point cover seeded at row 0; an upper bound on the exact size."""
    if not radius > 0:
        raise DomainError(f"radius must be positive, got {radius!r}")
    dist = _pairwise(_rows(matrix), p, normalized)
    centers = [0]
    nearest = dist[0].copy()
    while nearest.max() > radius:
        far = int(np.argmax(nearest))
        centers.append(far)
        nearest = np.minimum(nearest, dist[far])
    return CoverResult(len(centers), "greedy", float(radius), float(p), tuple(centers))


def covering_number_exact(matrix, radius, p=1.0, normalized=True):
    """Minimum internal cover by depth-first branch and bound.

    Every row must be within ``radius`` of a chosen row. Exponential in the
    worst case, hence the ``M <= 22`` guard.
    """
    if not radius > 0:
        raise DomainError(f"radius must be positive, got {radius!r}")
    values = _rows(matrix)
    m = values.shape[0]
    if m > EXACT_COVER_MAX_ROWS:
        raise DomainError(f"exact cover limited to {EXACT_COVER_MAX_ROWS} rows, got {m}")
    dist = _pairwise(values, p, normalized)
    ball = [sum(1 << j for j in range(m) if dist[i, j] <= radius) for i in range(m)]
    # which centers cover row j
    coverers = [[i for i in range(m) if ball[i] >> j & 1] for j in range(m)]
    full = (1 << m) - 1

    greedy = covering_number_greedy(values, radius, p, normalized)
    best = [greedy.size, list(greedy.centers)]

    def search(covered, chosen):
        if covered == full:
            if len(chosen) < best[0]:
                best[0], best[1] = len(chosen), list(chosen)
            return
        if len(chosen) + 1 >= best[0]:
            return
        first = ((full & ~covered) & -(full & ~covered)).bit_length() - 1
        for c in sorted(coverers[first], key=lambda i: -bin(ball[i] & ~covered).count("1")):
            chosen.append(c)
            search(covered | ball[c], chosen)
            chosen.pop()

    search(0, [])
    return CoverResult(best[0], "exact", float(radius), float(p), tuple(sorted(best[1])))


def covering_log_function(matrix, p=2.0, method="greedy", normalized=True):
    """Return ``xi -> ln N(F, xi, l_p)`` for use in chaining bounds."""
    cover = {"greedy": covering_number_greedy, "exact": covering_number_exact}[method]
    values = _rows(matrix)
    diam = diameter(values, p, normalized)

    def log_cover(xi):
        if xi >= diam:
            return 0.0
        return math.log(cover(values, xi, p, normalized).size)

    return log_cover


def uen_estimate(class_sampler, n, radius, p=1.0, draws=10, seed=0):
    """Max over ``draws`` sampled 2N-point datasets of the log greedy cover size.

    ``class_sampler(rng, size)`` must return an :class:`EvaluationMatrix` on
    ``size`` fresh points. The true supremum is over all datasets, so this
    is an under-estimate; it is nondecreasing in ``draws`` for a fixed seed.
    """
    if draws < 1:
        raise DomainError("draws must be >= 1")
    rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(draws)]
    best = 0.0
    for rng in rngs:
        mat = class_sampler(rng, 2 * n)
        best = max(best, math.log(covering_number_greedy(mat, radius, p).size))
    return best


def _sign_matrix(n):
    codes = np.arange(2**n, dtype=np.int64)[:, None]
    bits = (codes >> np.arange(n, dtype=np.int64)) & 1
    return (2 * bits - 1).astype(float)


def rademacher_exact(matrix):
    """Empirical Rademacher complexity by enumerating all ``2^N`` sign vectors."""
    values = _rows(matrix)
    n = values.shape[1]
    if n > RADEMACHER_EXACT_MAX_N:
        raise DomainError(f"exact enumeration limited to N <= {RADEMACHER_EXACT_MAX_N}, got {n}")
    total = 0.0
    chunk_bits = min(n, 16)
    low = _sign_matrix(chunk_bits)
    low_part = low @ values[:, :chunk_bits].T
    for hi_code in range(2 ** (n - chunk_bits)):
        hi_signs = np.array(
            [1.0 if hi_code >> k & 1 else -1.0 for k in range(n - chunk_bits)]
        )
        shift = values[:, chunk_bits:] @ hi_signs if n > chunk_bits else 0.0
        total += float(np.max(low_part + shift, axis=1).sum())
    return total / (2**n * n)


def rademacher_mc(matrix, trials=10_000, seed=0):
    """Monte Carlo estimate of the empirical Rademacher complexity.

    Returns ``(estimate, stderr)`` with stderr the sample standard
    deviation over ``sqrt(trials)``.
    """
    if trials < 100:
        raise DomainError(f"need at least 100 trials, got {trials}")
    values = _rows(matrix)
    n = values.shape[1]
    rng = np.random.default_rng(seed)
    sups = np.empty(trials)
    block = max(1, 2**20 // max(n, 1))
    for start in range(0, trials, block):
        stop = min(trials, start + block)
        signs = rng.integers(0, 2, size=(stop - start, n)) * 2.0 - 1.0
        sups[start:stop] = np.max(signs @ values.T, axis=1) / n
    return float(sups.mean()), float(sups.std(ddof=1) / math.sqrt(trials))


def rademacher_expected_mc(class_sampler, n, trials_outer=20, trials_inner=1000, seed=0):
    """Rademacher complexity averaged over datasets as well as signs.

    Each outer draw builds a dataset with ``class_sampler(rng, n)`` and runs
    :func:`rademacher_mc` on it. The stderr is the spread of the per-dataset
    estimates over ``sqrt(trials_outer)``; with a single outer draw it falls
    back to the inner stderr.
    """
    if trials_outer < 1 or trials_inner < 1:
        raise DomainError("trial counts must be >= 1")
    seeds = np.random.SeedSequence(seed).spawn(trials_outer)
    estimates, inner_err = [], []
    for ss in seeds:
        data_ss, sign_ss = ss.spawn(2)
        mat = class_sampler(np.random.default_rng(data_ss), n)
        est, err = rademacher_mc(mat, max(trials_inner, 100), seed=sign_ss)
        estimates.append(est)
        inner_err.append(err)
    estimates = np.array(estimates)
    if trials_outer == 1:
        return float(estimates[0]), float(inner_err[0])
    return float(estimates.mean()), float(estimates.std(ddof=1) / math.sqrt(trials_outer))


def read_matrix_csv(path, range_=None):
    """Read rows-are-functions CSV; a non-numeric first row is taken as a header.

    Without ``range_`` the range is the min/max of the entries (widened by
    one unit if they are all equal).
    """
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise DomainError(f"{path}: empty matrix file")
    try:
        [float(v) for v in rows[0]]
    except ValueError:
        rows = rows[1:]
    values = np.array([[float(v) for v in r] for r in rows], dtype=float)
    if range_ is None:
        lo, hi = float(values.min()), float(values.max())
        range_ = BoundedRange(lo, hi if hi > lo else lo + 1.0)
    return EvaluationMatrix(values, range_)

