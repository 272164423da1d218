"""Symmetric and general Dirac mixtures, plus their sample moments.

Expanded symmetric mixtures follow a fixed row layout: rows ``0..L-1`` hold
``+s_i``, rows ``L..2L-1`` hold ``-s_i`` and the optional center sample is the
last row.  The moment routines detect this layout and add each ``+s_i`` term
to its ``-s_i`` partner before accumulating, so odd moments cancel exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError

WEIGHT_SUM_TOL = 1e-12


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SymmetricSampleSet:
    """Half of a point-symmetric sample set.

    ``half_positions`` is the ``L x N`` matrix of free samples ``s_i``; the
    mirrored samples ``-s_i`` and, if ``includes_center``, a sample at the
    origin are implied.
    """

    half_positions: np.ndarray
    includes_center: bool = False

    def __post_init__(self):
        pos = _frozen(self.half_positions)
        if pos.ndim != 2 or pos.shape[0] < 1 or pos.shape[1] < 1:
            raise ConfigError(f"half_positions must be a non-empty L x N matrix, got shape {pos.shape}")
        if not np.all(np.isfinite(pos)):
            raise ConfigError("half_positions contains non-finite entries")
        object.__setattr__(self, "half_positions", pos)
        object.__setattr__(self, "includes_center", bool(self.includes_center))

    @property
    def dim(self) -> int:
        return self.half_positions.shape[1]

    @property
    def half_count(self) -> int:
        return self.half_positions.shape[0]

    @property
    def total_samples(self) -> int:
        return 2 * self.half_count + int(self.includes_center)

    def with_positions(self, positions) -> "SymmetricSampleSet":
        return SymmetricSampleSet(positions, self.includes_center)


@dataclass(frozen=True)
class DiracMixture:
    """Weighted point masses: ``positions`` is ``M x N``, ``weights`` length ``M``.

    Weights must sum to one.  They are not required to be positive: the
    fifth-degree cubature rule and the randomized UKF both produce negative
    weights for some dimensions.
    """

    positions: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pos = _frozen(self.positions)
        w = _frozen(self.weights)
        if pos.ndim != 2 or w.ndim != 1 or pos.shape[0] != w.shape[0] or pos.shape[0] == 0:
            raise ConfigError(f"inconsistent mixture shapes {pos.shape} / {w.shape}")
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(w))):
            raise ConfigError("mixture contains non-finite positions or weights")
        if abs(math.fsum(w) - 1.0) > WEIGHT_SUM_TOL:
            raise ConfigError(f"mixture weights sum to {math.fsum(w)!r}, expected 1")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    @property
    def size(self) -> int:
        return self.positions.shape[0]


def expand(sset: SymmetricSampleSet) -> DiracMixture:
    s = sset.half_positions
    rows = [s, -s]
    if sset.includes_center:
        rows.append(np.zeros((1, sset.dim)))
    m = sset.total_samples
    return DiracMixture(np.vstack(rows), np.full(m, 1.0 / m))


def _paired_layout(mix: DiracMixture):
    """Return ``(L, has_center)`` if ``mix`` uses the symmetric row layout, else None."""
    m = mix.size
    has_center = m % 2 == 1
    half = m // 2
    if half == 0:
        return None
    pos, w = mix.positions, mix.weights
    if has_center and (np.any(pos[-1] != 0.0)):
        return None
    if not np.array_equal(pos[half:2 * half], -pos[:half]):
        return None
    if not np.array_equal(w[half:2 * half], w[:half]):
        return None
    return half, has_center


def _weighted_sum(values: np.ndarray, mix: DiracMixture) -> np.ndarray:
    """``sum_i w_i * values[i]`` along axis 0, pairing mirrored rows first."""
    w = mix.weights
    layout = _paired_layout(mix)
    if layout is None:
        return np.tensordot(w, values, axes=1)
    half, has_center = layout
    paired = values[:half] + values[half:2 * half]
    total = np.tensordot(w[:half], paired, axes=1)
    if has_center:
        total = total + w[-1] * values[-1]
    return total


def sample_mean(mix: DiracMixture) -> np.ndarray:
    return _weighted_sum(mix.positions, mix)


def sample_covariance(mix: DiracMixture, about=None) -> np.ndarray:
    if about is None:
        about = sample_mean(mix)
    d = mix.positions - np.asarray(about, dtype=np.float64)
    cov = (d * mix.weights[:, None]).T @ d
    return 0.5 * (cov + cov.T)


def _monomials(positions: np.ndarray, exponents: Sequence[int]) -> np.ndarray:
    # repeated products, not ``**``: libm pow is not exactly odd in its base,
    # which would break the exact cancellation of mirrored rows
    prod = np.ones(positions.shape[0])
    for j, n in enumerate(exponents):
        for _ in range(n):
            prod = prod * positions[:, j]
    return prod


def raw_moment(mix: DiracMixture, exponents: Sequence[int]) -> float:
    """``E[x_1^n_1 ... x_N^n_N]`` under the mixture."""
    exponents = tuple(int(n) for n in exponents)
    if len(exponents) != mix.dim or any(n < 0 for n in exponents):
        raise ConfigError(f"exponents {exponents} do not match dimension {mix.dim}")
    return float(_weighted_sum(_monomials(mix.positions, exponents), mix))


def double_factorial(n: int) -> int:
    return math.prod(range(n, 0, -2)) if n > 0 else 1


def true_normal_moment(exponents: Sequence[int]) -> float:
    """Raw moment of the standard normal: product of ``(n_j - 1)!!`` over even ``n_j``."""
    if any(n < 0 for n in exponents):
        raise ConfigError("exponents must be non-negative")
    if any(n % 2 for n in exponents):
        return 0.0
    return float(math.prod(double_factorial(n - 1) for n in exponents))
