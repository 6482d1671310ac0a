import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bennett_bounds.bounds import BoundedRange
from bennett_bounds.complexity import (
    EvaluationMatrix,
    covering_log_function,
    covering_number_exact,
    covering_number_greedy,
    diameter,
    empirical_lp_distance,
    rademacher_exact,
    rademacher_expected_mc,
    rademacher_mc,
    read_matrix_csv,
    uen_estimate,
)
from bennett_bounds.special_functions import DomainError

UNIT = BoundedRange(0.0, 1.0)


def brute_force_cover(values, radius, p):
    """Smallest subset of rows whose closed balls cover every row."""
    m = len(values)
    dist = [[empirical_lp_distance(values[i], values[j], p) for j in range(m)] for i in range(m)]
    for k in range(1, m + 1):
        for subset in itertools.combinations(range(m), k):
            if all(min(dist[c][j] for c in subset) <= radius for j in range(m)):
                return k
    raise AssertionError("unreachable")


def brute_force_rademacher(values):
    n = values.shape[1]
    total = 0.0
    for signs in itertools.product((-1.0, 1.0), repeat=n):
        total += max(float(np.dot(signs, row)) for row in values) / n
    return total / 2**n


small_matrices = arrays(
    np.float64,
    st.tuples(st.integers(1, 7), st.integers(1, 6)),
    elements=st.floats(0.0, 1.0, allow_subnormal=False),
)


def test_evaluation_matrix_validation():
    with pytest.raises(DomainError):
        EvaluationMatrix([[0.2, 1.3]], UNIT)
    with pytest.raises(DomainError):
        EvaluationMatrix(np.zeros((0, 3)), UNIT)
    m = EvaluationMatrix([0.1, 0.2], UNIT)
    assert m.shape == (1, 2)
    with pytest.raises(ValueError):
        m.values[0, 0] = 0.5


def test_distance_examples():
    assert empirical_lp_distance([0, 0, 0, 0], [1, 1, 1, 1], 1) == 1.0
    assert empirical_lp_distance([0, 0, 0, 0], [1, 0, 0, 0], 2) == pytest.approx(0.5)
    assert empirical_lp_distance([0, 0, 0, 0], [1, 0, 0, 0], 2, normalized=False) == 1.0
    with pytest.raises(DomainError):
        empirical_lp_distance([0, 1], [0, 1, 2], 1)


def test_cover_examples():
    two = EvaluationMatrix([[0.0] * 5, [1.0] * 5], UNIT)
    assert covering_number_greedy(two, 0.99).size == 2
    assert covering_number_greedy(two, 1.0).size == 1
    assert covering_number_exact(two, 1.0).size == 1
    single = EvaluationMatrix([[0.4, 0.6]], UNIT)
    assert covering_number_greedy(single, 1e-9).size == 1
    with pytest.raises(DomainError):
        covering_number_greedy(two, 0.0)


def test_exact_cover_guard():
    big = EvaluationMatrix(np.random.default_rng(0).random((23, 3)), UNIT)
    with pytest.raises(DomainError):
        covering_number_exact(big, 0.1)


def test_exact_beats_greedy_on_constructed_case():
    # points on a line: greedy from the left end needs 3, optimum is 2
    values = np.array([[0.0], [0.3], [0.45], [0.6], [0.9]])
    mat = EvaluationMatrix(values, UNIT)
    assert covering_number_exact(mat, 0.3).size == 2
    assert covering_number_greedy(mat, 0.3).size == 3


@given(small_matrices, st.floats(0.01, 1.0), st.sampled_from([1.0, 2.0]))
@settings(max_examples=150, deadline=None)
def test_exact_cover_matches_brute_force(values, radius, p):
    mat = EvaluationMatrix(values, UNIT)
    exact = covering_number_exact(mat, radius, p)
    greedy = covering_number_greedy(mat, radius, p)
    assert exact.size == brute_force_cover(values, radius, p)
    assert 1 <= exact.size <= greedy.size <= values.shape[0]
    dist = np.array([[empirical_lp_distance(a, b, p) for b in values] for a in values])
    for cover in (exact, greedy):
        assert np.all(dist[list(cover.centers)].min(axis=0) <= radius)


@given(small_matrices, st.floats(0.01, 1.0), st.randoms(use_true_random=False))
@settings(max_examples=100, deadline=None)
def test_exact_cover_permutation_invariant(values, radius, rnd):
    rows = list(range(values.shape[0]))
    cols = list(range(values.shape[1]))
    rnd.shuffle(rows)
    rnd.shuffle(cols)
    a = covering_number_exact(EvaluationMatrix(values, UNIT), radius).size
    b = covering_number_exact(EvaluationMatrix(values[rows][:, cols], UNIT), radius).size
    assert a == b


@given(small_matrices, st.floats(0.01, 0.5), st.floats(0.01, 0.5))
@settings(max_examples=100, deadline=None)
def test_cover_nonincreasing_in_radius(values, r1, r2):
    lo, hi = sorted((r1, r2))
    mat = EvaluationMatrix(values, UNIT)
    assert covering_number_exact(mat, hi).size <= covering_number_exact(mat, lo).size


def test_covering_log_function():
    mat = EvaluationMatrix([[0.0] * 4, [1.0] * 4], UNIT)
    fn = covering_log_function(mat, p=2.0)
    assert fn(0.5) == pytest.approx(math.log(2))
    assert fn(1.0) == 0.0
    assert diameter(mat) == 1.0


def test_rademacher_examples():
    assert rademacher_exact(EvaluationMatrix([[0.7, 0.2, 0.1]], UNIT)) == pytest.approx(0.0, abs=1e-15)
    # {0, 1} on one point: sup(sigma * 0, sigma * 1) averages to 1/2
    assert rademacher_exact(EvaluationMatrix([[0.0], [1.0]], UNIT)) == pytest.approx(0.5)
    # every binary row is present, so the sup counts the positive signs
    cube = np.array(list(itertools.product((0.0, 1.0), repeat=3)))
    assert rademacher_exact(EvaluationMatrix(cube, UNIT)) == pytest.approx(0.5)


@given(small_matrices)
@settings(max_examples=100, deadline=None)
def test_rademacher_exact_matches_brute_force(values):
    mat = EvaluationMatrix(values, UNIT)
    assert rademacher_exact(mat) == pytest.approx(brute_force_rademacher(values), abs=1e-12)


def test_rademacher_exact_large_n_chunking():
    values = np.random.default_rng(3).random((4, 18))
    mat = EvaluationMatrix(values, UNIT)
    signs = np.array(list(itertools.product((-1.0, 1.0), repeat=18)))
    direct = float(np.max(signs @ values.T, axis=1).mean() / 18)
    assert rademacher_exact(mat) == pytest.approx(direct, rel=1e-12)
    with pytest.raises(DomainError):
        rademacher_exact(EvaluationMatrix(np.zeros((2, 21)), UNIT))


def test_rademacher_mc_agrees_with_exact():
    rng = np.random.default_rng(11)
    for seed in range(5):
        mat = EvaluationMatrix(rng.random((6, 10)), UNIT)
        est, err = rademacher_mc(mat, trials=20_000, seed=seed)
        assert abs(est - rademacher_exact(mat)) <= 4 * err


def test_rademacher_mc_reproducible():
    mat = EvaluationMatrix(np.random.default_rng(1).random((5, 8)), UNIT)
    assert rademacher_mc(mat, 1000, seed=4) == rademacher_mc(mat, 1000, seed=4)
    with pytest.raises(DomainError):
        rademacher_mc(mat, 50)


def _coin_class(rng, size):
    z = rng.integers(0, 2, size=size).astype(float)
    return EvaluationMatrix(np.vstack([z, 1.0 - z]), UNIT)


def test_rademacher_expected_mc_two_point_oracle():
    # F = {z, 1 - z}, z ~ Bernoulli(1/2), N = 3: enumerate data and signs
    n = 3
    exact = 0.0
    for z in itertools.product((0.0, 1.0), repeat=n):
        row = np.array(z)
        exact += rademacher_exact(EvaluationMatrix(np.vstack([row, 1 - row]), UNIT)) / 2**n
    est, err = rademacher_expected_mc(_coin_class, n, trials_outer=200, trials_inner=2000, seed=5)
    assert abs(est - exact) <= 4 * err + 0.01


def test_uen_estimate_examples():
    def singleton(rng, size):
        return EvaluationMatrix(rng.random((1, size)), UNIT)

    assert uen_estimate(singleton, 5, 0.1, draws=3) == 0.0
    # two constant functions at distance 1 need 2 balls below radius 1
    def pair(rng, size):
        return EvaluationMatrix(np.vstack([np.zeros(size), np.ones(size)]), UNIT)

    assert uen_estimate(pair, 5, 0.5) == pytest.approx(math.log(2))
    a = uen_estimate(_coin_class, 4, 0.2, draws=2, seed=9)
    b = uen_estimate(_coin_class, 4, 0.2, draws=8, seed=9)
    assert a <= b
    with pytest.raises(DomainError):
        uen_estimate(pair, 5, 0.5, draws=0)


def test_read_matrix_csv(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("a,b,c\n0.1,0.2,0.3\n0.4,0.5,0.6\n")
    mat = read_matrix_csv(path, UNIT)
    assert mat.shape == (2, 3)
    path.write_text("2,2\n2,2\n")
    mat = read_matrix_csv(path)
    assert mat.range.a == 2.0 and mat.range.b == 3.0
