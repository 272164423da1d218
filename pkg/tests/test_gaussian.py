import numpy as np
import pytest

from lcdsym.baselines import ukf_equal
from lcdsym.errors import ConfigError, NotPositiveDefiniteError
from lcdsym.gaussian import GaussianDensity, check_standard, to_gaussian
from lcdsym.mixture import DiracMixture, sample_covariance, sample_mean


def test_density_validation():
    with pytest.raises(NotPositiveDefiniteError):
        GaussianDensity([0, 0], [[1, 2], [2, 1]])
    with pytest.raises(NotPositiveDefiniteError):
        GaussianDensity([0, 0], [[1, 0.1], [0.0, 1]])
    with pytest.raises(ConfigError):
        GaussianDensity([0, 0, 0], np.eye(2))


def test_to_gaussian_moments():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((4, 4))
    target = GaussianDensity(rng.standard_normal(4), a @ a.T + np.eye(4))
    mix = to_gaussian(ukf_equal(4, "odd"), target)
    np.testing.assert_allclose(sample_mean(mix), target.mean, atol=1e-12)
    np.testing.assert_allclose(sample_covariance(mix), target.covariance, atol=1e-12)


def test_non_standard_set_rejected():
    mix = DiracMixture(np.array([[2.0], [-2.0]]), np.array([0.5, 0.5]))
    with pytest.raises(ConfigError):
        check_standard(mix)
    with pytest.raises(ConfigError):
        to_gaussian(mix, GaussianDensity.standard(1))
