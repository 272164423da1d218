"""Linear Regression Kalman Filter: sample-based prediction and update.

Models are evaluated on all samples at once: a system model maps
``(x: M x N, w: M x W) -> M x N`` and a measurement model maps
``(x: M x N, v: M x V) -> M x Y``.  A sampling scheme is any callable
``dim -> DiracMixture`` returning a standard-normal sample set.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import (
    ConfigError,
    InnovationCovarianceSingularError,
    ModelEvaluationError,
    NumericalConsistencyError,
)
from .gaussian import GaussianDensity, check_standard
from .mixture import DiracMixture

SamplingScheme = Callable[[int], DiracMixture]

PSD_TOL = 1e-10


@dataclass(frozen=True)
class StateEstimate:
    time_index: int
    density: GaussianDensity

    @property
    def mean(self) -> np.ndarray:
        return self.density.mean

    @property
    def covariance(self) -> np.ndarray:
        return self.density.covariance


@dataclass(frozen=True)
class SystemModel:
    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    noise: GaussianDensity


@dataclass(frozen=True)
class MeasurementModel:
    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    noise: GaussianDensity
    dim: int


@dataclass(frozen=True)
class MeasurementMoments:
    mean: np.ndarray
    covariance: np.ndarray
    cross_covariance: np.ndarray


def draw_standard(scheme: SamplingScheme, dim: int) -> DiracMixture:
    mix = scheme(dim)
    if mix.dim != dim:
        raise ConfigError(f"scheme returned a {mix.dim}-dimensional set, expected {dim}")
    if abs(math.fsum(mix.weights) - 1.0) > 1e-12:
        raise ConfigError("scheme weights do not sum to one")
    check_standard(mix)
    return mix


def joint_sampling(state: GaussianDensity, noise: GaussianDensity, scheme: SamplingScheme) -> DiracMixture:
    """Samples of the block-diagonal joint Gaussian of ``[state; noise]``."""
    n = state.dim
    std = draw_standard(scheme, n + noise.dim)
    s = std.positions
    x = state.mean + s[:, :n] @ state.chol.T
    w = noise.mean + s[:, n:] @ noise.chol.T
    return DiracMixture(np.hstack([x, w]), std.weights)


def clean_covariance(cov: np.ndarray, what: str = "covariance") -> np.ndarray:
    """Symmetrize; zero eigenvalues in ``[-PSD_TOL, 0)``, reject anything lower."""
    cov = 0.5 * (cov + cov.T)
    vals, vecs = np.linalg.eigh(cov)
    if vals[0] < -PSD_TOL:
        raise NumericalConsistencyError(f"{what} has eigenvalue {vals[0]:.3e} < -{PSD_TOL}")
    if vals[0] < 0:
        cov = (vecs * np.maximum(vals, 0.0)) @ vecs.T
        cov = 0.5 * (cov + cov.T)
    return cov


def _evaluate(func, x, v, out_dim, what):
    y = np.asarray(func(x, v), dtype=np.float64)
    if y.ndim == 1 and out_dim == 1:
        y = y[:, None]
    if y.shape != (x.shape[0], out_dim):
        raise ConfigError(f"{what} returned shape {y.shape}, expected {(x.shape[0], out_dim)}")
    bad = ~np.all(np.isfinite(y), axis=1)
    if np.any(bad):
        raise ModelEvaluationError(f"{what} produced non-finite output at sample {int(np.argmax(bad))}")
    return y


def _weighted_moments(w, a):
    mean = w @ a
    d = a - mean
    return mean, (d * w[:, None]).T @ d


def predict_sampled(est: StateEstimate, model: SystemModel, scheme: SamplingScheme) -> StateEstimate:
    n = est.density.dim
    joint = joint_sampling(est.density, model.noise, scheme)
    x, w = joint.positions[:, :n], joint.positions[:, n:]
    y = _evaluate(model.func, x, w, n, "system model")
    mean, cov = _weighted_moments(joint.weights, y)
    cov = clean_covariance(cov, "predicted covariance")
    return StateEstimate(est.time_index + 1, GaussianDensity(mean, cov))


def predict_linear(est: StateEstimate, a, noise: GaussianDensity) -> StateEstimate:
    a = np.asarray(a, dtype=np.float64)
    n = est.density.dim
    if a.shape != (n, n) or noise.dim != n:
        raise ConfigError(f"system matrix {a.shape} / noise dim {noise.dim} inconsistent with state dim {n}")
    mean = a @ est.mean + noise.mean
    cov = a @ est.covariance @ a.T + noise.covariance
    return StateEstimate(est.time_index + 1, GaussianDensity(mean, 0.5 * (cov + cov.T)))


def measurement_moments(prior: GaussianDensity, model: MeasurementModel, scheme: SamplingScheme) -> MeasurementMoments:
    n = prior.dim
    joint = joint_sampling(prior, model.noise, scheme)
    x, v = joint.positions[:, :n], joint.positions[:, n:]
    z = _evaluate(model.func, x, v, model.dim, "measurement model")
    w = joint.weights
    y_mean, cy = _weighted_moments(w, z)
    dz = z - y_mean
    cxy = ((x - prior.mean) * w[:, None]).T @ dz
    return MeasurementMoments(y_mean, 0.5 * (cy + cy.T), cxy)


def kalman_update(prior: GaussianDensity, measurement, mom: MeasurementMoments) -> GaussianDensity:
    y = np.asarray(measurement, dtype=np.float64).reshape(-1)
    if y.shape != mom.mean.shape:
        raise ConfigError(f"measurement has dimension {y.size}, model predicts {mom.mean.size}")
    try:
        factor = cho_factor(mom.covariance, lower=True)
    except LinAlgError:
        raise InnovationCovarianceSingularError("measurement covariance is not positive definite") from None
    gain = cho_solve(factor, mom.cross_covariance.T).T
    mean = prior.mean + gain @ (y - mom.mean)
    cov = clean_covariance(prior.covariance - gain @ mom.cross_covariance.T, "posterior covariance")
    return GaussianDensity(mean, cov)


def update(est: StateEstimate, measurement, model: MeasurementModel, scheme: SamplingScheme) -> StateEstimate:
    mom = measurement_moments(est.density, model, scheme)
    return StateEstimate(est.time_index, kalman_update(est.density, measurement, mom))
