from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cholesky

from .errors import ConfigError, NotPositiveDefiniteError
from .mixture import DiracMixture, sample_covariance, sample_mean

STANDARD_TOL = 1e-8


@dataclass(frozen=True)
class GaussianDensity:
    mean: np.ndarray
    covariance: np.ndarray
    chol: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mean = np.array(self.mean, dtype=np.float64).reshape(-1)
        cov = np.array(self.covariance, dtype=np.float64)
        if cov.ndim == 0:
            cov = cov.reshape(1, 1)
        n = mean.shape[0]
        if cov.shape != (n, n):
            raise ConfigError(f"covariance shape {cov.shape} does not match mean of length {n}")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise NotPositiveDefiniteError("non-finite Gaussian parameters")
        scale = max(1.0, float(np.max(np.abs(cov))))
        if np.max(np.abs(cov - cov.T)) > 1e-12 * scale:
            raise NotPositiveDefiniteError("covariance is not symmetric")
        try:
            chol = cholesky(cov, lower=True)
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefiniteError(f"covariance is not positive definite: {exc}") from None
        for name, val in (("mean", mean), ("covariance", cov), ("chol", chol)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @classmethod
    def standard(cls, dim: int) -> "GaussianDensity":
        return cls(np.zeros(dim), np.eye(dim))


def check_standard(mix: DiracMixture, tol: float = STANDARD_TOL) -> None:
    mean = sample_mean(mix)
    cov = sample_covariance(mix, np.zeros(mix.dim))
    if np.max(np.abs(mean)) > tol or np.max(np.abs(cov - np.eye(mix.dim))) > tol:
        raise ConfigError("sample set does not have zero mean and identity covariance")


def to_gaussian(std_set: DiracMixture, target: GaussianDensity) -> DiracMixture:
    """Map a standard-normal sample set onto ``target`` via ``x = mu + A s``."""
    if std_set.dim != target.dim:
        raise ConfigError(f"sample dimension {std_set.dim} != target dimension {target.dim}")
    check_standard(std_set)
    return DiracMixture(target.mean + std_set.positions @ target.chol.T, std_set.weights)
