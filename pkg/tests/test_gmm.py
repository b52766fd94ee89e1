import math

import numpy as np
import pytest

from drivestate.errors import DimensionError
from drivestate.gmm import GaussianComponent, GaussianMixture, diagonal_mixture, gmm_log_pdf

from oracles import linear_space_mixture_pdf


def standard_gaussian(d):
    return diagonal_mixture([1.0], np.zeros((1, d)), np.ones((1, d)))


def test_density_at_mean_of_standard_gaussian():
    g = standard_gaussian(2)
    result = gmm_log_pdf(g, np.zeros(2))
    assert result.valid
    assert result.value == pytest.approx(-math.log(2 * math.pi), abs=1e-12)


def test_two_identical_components_match_single():
    single = standard_gaussian(2)
    double = diagonal_mixture([0.5, 0.5], np.zeros((2, 2)), np.ones((2, 2)))
    x = np.array([0.3, -1.1])
    assert gmm_log_pdf(double, x).value == pytest.approx(
        gmm_log_pdf(single, x).value, rel=1e-12
    )


def test_matches_naive_linear_space_summation():
    rng = np.random.default_rng(3)
    g = diagonal_mixture(
        rng.dirichlet(np.ones(3)),
        rng.normal(0, 1, size=(3, 3)),
        rng.uniform(0.3, 2.0, size=(3, 3)),
    )
    for _ in range(20):
        x = rng.normal(0, 1.5, size=3)
        expected = math.log(linear_space_mixture_pdf(g, x))
        assert gmm_log_pdf(g, x).value == pytest.approx(expected, rel=1e-10)


def test_full_covariance_matches_naive():
    rng = np.random.default_rng(5)
    a = rng.normal(size=(2, 2))
    cov = a @ a.T + 0.5 * np.eye(2)
    g = GaussianMixture((GaussianComponent(1.0, np.zeros(2), cov),))
    x = np.array([0.4, -0.2])
    expected = math.log(linear_space_mixture_pdf(g, x))
    assert gmm_log_pdf(g, x).value == pytest.approx(expected, rel=1e-10)


def test_component_permutation_invariance():
    rng = np.random.default_rng(11)
    weights = rng.dirichlet(np.ones(4))
    means = rng.normal(size=(4, 2))
    variances = rng.uniform(0.2, 1.0, size=(4, 2))
    g = diagonal_mixture(weights, means, variances)
    perm = [2, 0, 3, 1]
    g2 = diagonal_mixture(weights[perm], means[perm], variances[perm])
    x = rng.normal(size=2)
    assert gmm_log_pdf(g, x).value == pytest.approx(gmm_log_pdf(g2, x).value, rel=1e-12)


def test_no_overflow_far_from_mean():
    g = standard_gaussian(1)
    result = gmm_log_pdf(g, np.array([1e4]))
    assert result.value < -1e7
    assert not math.isnan(result.value)


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        gmm_log_pdf(standard_gaussian(2), np.zeros(3))


def test_weights_must_sum_to_one():
    with pytest.raises(ValueError):
        diagonal_mixture([0.6, 0.6], np.zeros((2, 1)), np.ones((2, 1)))


def test_covariance_floor_enforced():
    with pytest.raises(ValueError):
        diagonal_mixture([1.0], np.zeros((1, 2)), np.full((1, 2), 1e-9))
