"""Monte Carlo referee for the deviation inequalities.

Trials are cut into fixed-size blocks; block ``i`` of stream ``s`` draws from
``SeedSequence(seed, spawn_key=(s, i))``. Block boundaries depend on the trial
count and sample size only, never on the number of workers, and per-block
results are reduced in block order, so output is a pure function of
``(trials, seed)``.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bounds import (
    BoundedRange,
    bennett_bdiff_tail,
    bennett_sum_tail,
    bennett_uen_tail,
    hoeffding_uen_tail,
)
from .complexity import EvaluationMatrix, uen_estimate
from .special_functions import DomainError

__all__ = [
    "DistributionSpec",
    "ExactMeanUnavailable",
    "McConfig",
    "PartitionedClass",
    "Scenario",
    "ScenarioResult",
    "TailCurve",
    "ValidityReport",
    "bdiff_tail_mc",
    "bound_curve",
    "check_bound_validity",
    "default_scenarios",
    "discrete_class",
    "generalization_gap_mc",
    "run_scenario",
    "sum_tail_mc",
    "threshold_class",
]

# Doubles drawn per block at most; bounds memory per worker.
_BLOCK_DRAWS = 2**22
_BLOCK_TRIALS = 2**14

_STREAM_SUM = 1
_STREAM_BDIFF = 2
_STREAM_PILOT = 3
_STREAM_GAP = 4
_STREAM_UEN = 5


class ExactMeanUnavailable(DomainError):
    """The expected value of a class member cannot be computed exactly."""


@dataclass(frozen=True)
class DistributionSpec:
    kind: str
    range: BoundedRange
    p: float = None
    points: tuple = None
    weights: tuple = None

    def __post_init__(self):
        if self.kind == "bernoulli":
            if self.p is None or not 0.0 < self.p < 1.0:
                raise DomainError(f"Bernoulli p must lie in (0, 1), got {self.p!r}")
        elif self.kind == "discrete":
            pts = np.asarray(self.points, dtype=float)
            w = np.asarray(self.weights, dtype=float)
            if pts.shape != w.shape or pts.ndim != 1 or pts.size == 0:
                raise DomainError("points and weights must be equal-length 1-d sequences")
            if np.any(w < 0) or not math.isclose(w.sum(), 1.0, abs_tol=1e-12):
                raise DomainError("weights must be nonnegative and sum to 1")
            if np.any(pts < self.range.a) or np.any(pts > self.range.b):
                raise DomainError("support points must lie inside the range")
        elif self.kind != "uniform":
            raise DomainError(f"unknown distribution kind {self.kind!r}")

    @classmethod
    def bernoulli_scaled(cls, p, range_=BoundedRange(0.0, 1.0)):
        """``a`` with probability ``1 - p``, ``b`` with probability ``p``."""
        return cls("bernoulli", range_, p=float(p))

    @classmethod
    def uniform(cls, range_=BoundedRange(0.0, 1.0)):
        return cls("uniform", range_)

    @classmethod
    def discrete(cls, points, weights, range_):
        return cls("discrete", range_, points=tuple(points), weights=tuple(weights))

    @property
    def name(self):
        if self.kind == "bernoulli":
            return f"bernoulli{self.p:g}"
        return self.kind

    def support(self):
        """``(points, weights)`` for the discrete kinds."""
        if self.kind == "bernoulli":
            return np.array([self.range.a, self.range.b]), np.array([1.0 - self.p, self.p])
        if self.kind == "discrete":
            return np.array(self.points, dtype=float), np.array(self.weights, dtype=float)
        raise ExactMeanUnavailable("uniform distribution has no finite support")

    def mean(self):
        if self.kind == "uniform":
            return 0.5 * (self.range.a + self.range.b)
        pts, w = self.support()
        return float(pts @ w)

    def cdf(self, t):
        if self.kind == "uniform":
            a, b = self.range.a, self.range.b
            return min(1.0, max(0.0, (t - a) / (b - a)))
        pts, w = self.support()
        return float(w[pts <= t].sum())

    def sample_sums(self, rng, n, size):
        """Sums of ``n`` i.i.d. draws, ``size`` times."""
        if self.kind == "uniform":
            a, w = self.range.a, self.range.width()
            return n * a + w * rng.random((size, n)).sum(axis=1)
        pts, weights = self.support()
        return rng.multinomial(n, weights, size=size) @ pts


@dataclass(frozen=True)
class PartitionedClass:
    """Finite class whose members are constant on the cells of a finite partition.

    ``values[i, k]`` is member ``i`` on cell ``k``; ``cell_probs[k]`` is the
    exact probability of cell ``k``. Expected risks are therefore exact and
    empirical risks depend only on the multinomial cell counts.
    """

    values: np.ndarray
    cell_probs: np.ndarray
    range: BoundedRange

    def __post_init__(self):
        vals = np.array(self.values, dtype=float, ndmin=2)
        probs = np.array(self.cell_probs, dtype=float)
        if vals.shape[1] != probs.size:
            raise DomainError("values must have one column per cell")
        if np.any(probs < 0) or not math.isclose(probs.sum(), 1.0, abs_tol=1e-12):
            raise DomainError("cell probabilities must be nonnegative and sum to 1")
        if np.any(vals < self.range.a) or np.any(vals > self.range.b):
            raise DomainError("class values must lie in the class range")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "cell_probs", probs)

    @property
    def size(self):
        return self.values.shape[0]

    def expected(self):
        return self.values @ self.cell_probs

    def sample_counts(self, rng, n, size):
        return rng.multinomial(n, self.cell_probs, size=size)

    def evaluation_matrix(self, rng, n):
        cells = rng.choice(self.cell_probs.size, size=n, p=self.cell_probs)
        return EvaluationMatrix(self.values[:, cells], self.range)


def discrete_class(dist, values, range_=None):
    """Class given by its values on the support of a discrete or Bernoulli distribution."""
    _, weights = dist.support()
    return PartitionedClass(values, weights, range_ or dist.range)


def threshold_class(dist, thresholds):
    """Indicators ``z -> 1{z <= t}``; exact for every distribution kind."""
    ts = np.sort(np.asarray(thresholds, dtype=float))
    cdf = np.array([dist.cdf(t) for t in ts])
    probs = np.diff(np.concatenate([[0.0], cdf, [1.0]]))
    # member j is 1 on cells 0..j
    values = (np.arange(ts.size + 1)[None, :] <= np.arange(ts.size)[:, None]).astype(float)
    return PartitionedClass(values, np.clip(probs, 0.0, None), BoundedRange(0.0, 1.0))


@dataclass(frozen=True)
class McConfig:
    trials: int
    seed: int
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise DomainError("trials must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be an unsigned 64-bit integer")
        if self.workers < 1:
            raise DomainError("workers must be >= 1")


@dataclass
class TailCurve:
    xi: np.ndarray
    probability: np.ndarray
    stderr: np.ndarray
    source: str
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.xi = np.asarray(self.xi, dtype=float)
        self.probability = np.asarray(self.probability, dtype=float)
        self.stderr = np.asarray(self.stderr, dtype=float)
        if not (self.xi.shape == self.probability.shape == self.stderr.shape):
            raise DomainError("xi, probability and stderr must have equal length")
        if np.any(np.diff(self.xi) <= 0):
            raise DomainError("xi grid must be strictly increasing")
        if np.any(self.probability < 0) or np.any(self.probability > 1):
            raise DomainError("probabilities must lie in [0, 1]")

    @property
    def points(self):
        return list(zip(self.xi.tolist(), self.probability.tolist(), self.stderr.tolist()))


def _blocks(trials, n):
    size = max(1, min(_BLOCK_TRIALS, _BLOCK_DRAWS // max(n, 1)))
    starts = range(0, trials, size)
    return [(i, min(size, trials - s)) for i, s in enumerate(starts)]


def _map_blocks(cfg, stream, trials, n, fn):
    """Run ``fn(rng, size)`` per block and return the results in block order."""

    def run(block):
        index, size = block
        ss = np.random.SeedSequence(cfg.seed, spawn_key=(stream, index))
        return fn(np.random.default_rng(ss), size)

    blocks = _blocks(trials, n)
    if cfg.workers == 1:
        return [run(b) for b in blocks]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(run, blocks))


def _exceedances(values, grid, strict):
    s = np.sort(values)
    side = "right" if strict else "left"
    return s.size - np.searchsorted(s, grid, side=side)


def _curve_from_counts(grid, counts, trials, source, info=None):
    prob = counts / trials
    err = np.sqrt(prob * (1.0 - prob) / trials)
    return TailCurve(grid, prob, err, source, info or {})


def _check_grid(xi_grid):
    grid = np.asarray(xi_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise DomainError("xi grid must be a non-empty strictly increasing sequence")
    return grid


def sum_tail_mc(dist, n, xi_grid, cfg, two_sided=True):
    """Empirical ``Pr{|E F - F| > xi}`` for ``F`` the sum of ``n`` draws.

    With ``two_sided=False`` the event is ``E F - F > xi``.
    """
    grid = _check_grid(xi_grid)
    center = n * dist.mean()

    def block(rng, size):
        dev = center - dist.sample_sums(rng, n, size)
        if two_sided:
            dev = np.abs(dev)
        return _exceedances(dev, grid, strict=True)

    counts = np.sum(_map_blocks(cfg, _STREAM_SUM, cfg.trials, n, block), axis=0)
    return _curve_from_counts(grid, counts, cfg.trials, "empirical")


def _risk_gaps(cls, counts, n):
    return cls.expected()[None, :] - counts @ cls.values.T / n


def bdiff_tail_mc(cls, n, xi_grid, cfg, pilot_factor=10):
    """Empirical one-sided tail ``Pr{H - E H >= xi}`` for ``H = sup_f (Ef - E_N f)``.

    ``E H`` comes from an independent pilot run of ``pilot_factor * trials``
    draws; its value and stderr are stored in ``info``.
    """
    if not isinstance(cls, PartitionedClass):
        raise ExactMeanUnavailable("bdiff_tail_mc needs a class with exact expected risks")
    grid = _check_grid(xi_grid)
    if pilot_factor < 10:
        raise DomainError("pilot run must use at least 10x the trials")
    pilot_trials = pilot_factor * cfg.trials

    def pilot_block(rng, size):
        h = _risk_gaps(cls, cls.sample_counts(rng, n, size), n).max(axis=1)
        return math.fsum(h), math.fsum(h * h)

    sums = _map_blocks(cfg, _STREAM_PILOT, pilot_trials, cls.size, pilot_block)
    total = math.fsum(s for s, _ in sums)
    total_sq = math.fsum(q for _, q in sums)
    mean_h = total / pilot_trials
    var_h = max(total_sq / pilot_trials - mean_h * mean_h, 0.0)
    mean_err = math.sqrt(var_h / pilot_trials)

    def block(rng, size):
        h = _risk_gaps(cls, cls.sample_counts(rng, n, size), n).max(axis=1)
        return _exceedances(h - mean_h, grid, strict=False)

    counts = np.sum(_map_blocks(cfg, _STREAM_BDIFF, cfg.trials, cls.size, block), axis=0)
    info = {"expected_h": mean_h, "expected_h_stderr": mean_err}
    return _curve_from_counts(grid, counts, cfg.trials, "empirical", info)


def generalization_gap_mc(cls, n, xi_grid, cfg):
    """Empirical ``Pr{sup_f |Ef - E_N f| > xi}``."""
    if not isinstance(cls, PartitionedClass):
        raise ExactMeanUnavailable("generalization_gap_mc needs exact expected risks")
    grid = _check_grid(xi_grid)

    def block(rng, size):
        gap = np.abs(_risk_gaps(cls, cls.sample_counts(rng, n, size), n)).max(axis=1)
        return _exceedances(gap, grid, strict=True)

    counts = np.sum(_map_blocks(cfg, _STREAM_GAP, cfg.trials, cls.size, block), axis=0)
    return _curve_from_counts(grid, counts, cfg.trials, "empirical")


def bound_curve(xi_grid, tail_fn, source):
    """Tabulate a bound; ``tail_fn(xi)`` returns a ``BoundResult``."""
    grid = _check_grid(xi_grid)
    results = [tail_fn(x) for x in grid]
    curve = TailCurve(
        grid,
        [r.value for r in results],
        np.zeros(grid.size),
        source,
        {
            "value_raw": [r.value_raw for r in results],
            "valid": [r.valid for r in results],
        },
    )
    return curve


@dataclass
class ValidityReport:
    passed: bool
    point_pass: list
    tightness: list
    slack_sigmas: float
    bound_source: str

    def failures(self):
        return [i for i, ok in enumerate(self.point_pass) if not ok]


def check_bound_validity(empirical, bound, slack_sigmas=3.0):
    """Pointwise ``empirical <= bound + slack * stderr``; PASS iff every point passes.

    ``tightness`` is bound / empirical where the empirical probability is
    positive, else ``None``.
    """
    if empirical.xi.shape != bound.xi.shape or not np.array_equal(empirical.xi, bound.xi):
        raise DomainError("empirical and bound curves must share a xi grid")
    ok = empirical.probability <= bound.probability + slack_sigmas * empirical.stderr
    tight = [
        (float(b / e) if e > 0 else None)
        for e, b in zip(empirical.probability, bound.probability)
    ]
    return ValidityReport(bool(ok.all()), ok.tolist(), tight, slack_sigmas, bound.source)


@dataclass(frozen=True)
class Scenario:
    name: str
    dist: DistributionSpec
    cls: PartitionedClass
    n: int
    sum_grid: tuple
    gap_grid: tuple


def _default_grid(scale, cap, points=16):
    grid = scale * np.linspace(0.05, 1.6, points)
    return tuple(float(x) for x in grid if x < cap)


def default_scenarios(ns=(10, 100, 1000), points=16):
    """Bernoulli p in {0.05, 0.5} and Uniform on [0, 1], crossed with ``ns``."""
    unit = BoundedRange(0.0, 1.0)
    dists = [
        DistributionSpec.bernoulli_scaled(0.05, unit),
        DistributionSpec.bernoulli_scaled(0.5, unit),
        DistributionSpec.uniform(unit),
    ]
    out = []
    for dist in dists:
        if dist.kind == "uniform":
            cls = threshold_class(dist, (0.25, 0.5, 0.75))
        else:
            cls = discrete_class(dist, [[0.0, 1.0], [1.0, 0.0], [0.2, 0.9]])
        for n in ns:
            out.append(
                Scenario(
                    name=f"{dist.name}_n{n}",
                    dist=dist,
                    cls=cls,
                    n=n,
                    sum_grid=_default_grid(math.sqrt(n) * dist.range.width(), n * dist.range.width(), points),
                    gap_grid=_default_grid(cls.range.width() / math.sqrt(n), cls.range.width() + 1e-12, points),
                )
            )
    return out


@dataclass
class ScenarioResult:
    scenario: Scenario
    curves: dict
    checks: dict
    log_uen: list

    @property
    def passed(self):
        return all(r.passed for r in self.checks.values())


def run_scenario(scenario, cfg, slack_sigmas=3.0, uen_draws=5):
    """Empirical tails plus the three Bennett-type bound curves and their validity checks.

    The Hoeffding UEN curve is tabulated for comparison only.
    """
    s = scenario
    n = s.n
    sum_range = s.dist.range
    cls_w = s.cls.range.width()

    sum_emp = sum_tail_mc(s.dist, n, s.sum_grid, cfg)
    sum_bound = bound_curve(s.sum_grid, lambda x: bennett_sum_tail(x, n, sum_range), "BennettSum")

    bdiff_emp = bdiff_tail_mc(s.cls, n, s.gap_grid, cfg)
    bdiff_bound = bound_curve(
        s.gap_grid, lambda x: bennett_bdiff_tail(x, n, cls_w / n), "BennettBdiff"
    )

    gap_emp = generalization_gap_mc(s.cls, n, s.gap_grid, cfg)
    uen_seed = np.random.SeedSequence(cfg.seed, spawn_key=(_STREAM_UEN,)).generate_state(2)
    log_uen = [
        uen_estimate(s.cls.evaluation_matrix, n, x / 8.0, p=1.0, draws=uen_draws, seed=uen_seed)
        for x in s.gap_grid
    ]
    uen_of = dict(zip(s.gap_grid, log_uen))
    gap_bound = bound_curve(
        s.gap_grid, lambda x: bennett_uen_tail(x, n, s.cls.range, uen_of[x]), "BennettUEN"
    )
    hoeff = bound_curve(
        s.gap_grid, lambda x: hoeffding_uen_tail(x, n, s.cls.range, uen_of[x]), "HoeffdingUEN"
    )

    curves = {
        "sum_empirical": sum_emp,
        "sum_bennett": sum_bound,
        "bdiff_empirical": bdiff_emp,
        "bdiff_bennett": bdiff_bound,
        "gap_empirical": gap_emp,
        "gap_bennett_uen": gap_bound,
        "gap_hoeffding_uen": hoeff,
    }
    checks = {
        "sum_tail": check_bound_validity(sum_emp, sum_bound, slack_sigmas),
        "bounded_difference": check_bound_validity(bdiff_emp, bdiff_bound, slack_sigmas),
        "uen_gap": check_bound_validity(gap_emp, gap_bound, slack_sigmas),
    }
    return ScenarioResult(s, curves, checks, log_uen)
