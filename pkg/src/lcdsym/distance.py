"""Modified Cramér–von Mises distance between the standard normal LCD and a
point-symmetric Dirac mixture LCD, and its gradient.

The distance splits as ``D = D1 - 2*D2(S) + D3(S)``.  ``D1`` and ``D2`` are
one-dimensional integrals over the kernel width ``b`` (Gauss–Legendre on
``[0, b_max]``); ``D3`` and its gradient use the closed forms in terms of the
exponential integral.  All formulas depend on the samples only through
``|s_i|^2`` and ``|s_i -/+ s_j|^2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import ConfigError, DegenerateConfigurationError, NumericalError
from .mixture import SymmetricSampleSet
from .special import ei_neg

DEFAULT_QUAD_NODES = 200
# squared distance below which two expanded samples count as coincident
COINCIDENT_SQ = 1e-24
# dimension from which pair distances come from the Gram expansion
GRAM_MIN_DIM = 100
_BLOCK_ENTRIES = 2_000_000


@dataclass(frozen=True)
class DistanceConfig:
    b_max: float
    quad_nodes: int = DEFAULT_QUAD_NODES

    def __post_init__(self):
        if not (self.b_max > 0 and math.isfinite(self.b_max)):
            raise ConfigError(f"b_max must be positive and finite, got {self.b_max}")
        if self.quad_nodes < 16:
            raise ConfigError(f"quad_nodes must be >= 16, got {self.quad_nodes}")


@dataclass(frozen=True)
class DistanceBreakdown:
    d1: float
    d2: float
    d3: float
    total: float


class _Counter:
    value = 0


_evaluations = _Counter()


def evaluation_count() -> int:
    """Number of distance/gradient evaluations performed in this process."""
    return _evaluations.value


@lru_cache(maxsize=16)
def _legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def quad_nodes_weights(cfg: DistanceConfig):
    x, w = _legendre(cfg.quad_nodes)
    half = 0.5 * cfg.b_max
    return half * (x + 1.0), half * w


def quad_b(integrand: Callable[[np.ndarray], np.ndarray], cfg: DistanceConfig):
    """Gauss–Legendre approximation of ``int_0^b_max integrand(b) db``.

    ``integrand`` receives the node vector and returns values of shape
    ``(nodes,)`` or ``(nodes, k)``; in the latter case ``k`` integrals are
    returned at once.
    """
    b, w = quad_nodes_weights(cfg)
    vals = np.asarray(integrand(b), dtype=np.float64)
    if not np.all(np.isfinite(vals)):
        raise NumericalError("non-finite integrand value in quadrature over b")
    out = np.tensordot(w, vals, axes=1)
    return float(out) if out.ndim == 0 else out


def _power_ratio(num: np.ndarray, den: np.ndarray, dim: int) -> np.ndarray:
    # (num/den)**(dim/2) through logs; underflows cleanly to 0 for large dim
    with np.errstate(under="ignore"):
        return np.exp(0.5 * dim * np.log(num / den))


def d1(dim: int, cfg: DistanceConfig) -> float:
    if dim < 1:
        raise ConfigError("dimension must be >= 1")
    return quad_b(lambda b: b * _power_ratio(b * b, 1.0 + b * b, dim), cfg)


def _center_d2_integral(dim: int, cfg: DistanceConfig) -> float:
    # int_0^b_max b * (2b^2/(1+2b^2))^(N/2) db
    return quad_b(lambda b: b * _power_ratio(2 * b * b, 1.0 + 2 * b * b, dim), cfg)


def _t_term(z: np.ndarray, c: float, e: np.ndarray, b_max: float) -> np.ndarray:
    """``b^2/2 exp(-z/c) + z/8 Ei(-z/c)`` with ``e = Ei(-z/c)`` (0 where z == 0)."""
    with np.errstate(under="ignore"):
        return 0.5 * b_max * b_max * np.exp(-z / c) + 0.125 * z * e


def _masked_ei(z: np.ndarray, c: float) -> np.ndarray:
    e = np.zeros_like(z)
    pos = z > 0.0
    if np.any(pos):
        e[pos] = ei_neg(-z[pos] / c)
    return e


def _pair_sums(s: np.ndarray, b_max: float, want_grad: bool):
    """Sum of closed-form D3 pair terms over all (i, j), and optionally the
    unscaled D3 gradient ``sum_j (s_i - s_j) Ei_- + (s_i + s_j) Ei_+``."""
    n_half, dim = s.shape
    c = 4.0 * b_max * b_max
    sq = np.einsum("ij,ij->i", s, s)
    gram = dim >= GRAM_MIN_DIM
    per_row = n_half if gram else n_half * dim
    block = max(1, _BLOCK_ENTRIES // max(per_row, 1))
    partial = []
    grad = np.zeros_like(s) if want_grad else None
    for start in range(0, n_half, block):
        stop = min(start + block, n_half)
        rows = s[start:stop]
        if gram:
            g = rows @ s.T
            base = sq[start:stop, None] + sq[None, :]
            zm = np.maximum(base - 2.0 * g, 0.0)
            zp = np.maximum(base + 2.0 * g, 0.0)
        else:
            diff = rows[:, None, :] - s[None, :, :]
            zm = np.einsum("ijk,ijk->ij", diff, diff)
            summ = rows[:, None, :] + s[None, :, :]
            zp = np.einsum("ijk,ijk->ij", summ, summ)
        idx = np.arange(start, stop)
        zm[idx - start, idx] = 0.0
        if want_grad:
            off = np.ones_like(zm, dtype=bool)
            off[idx - start, idx] = False
            bad = ((zm <= COINCIDENT_SQ) | (zp <= COINCIDENT_SQ)) & off
            if np.any(bad):
                i, j = np.argwhere(bad)[0]
                i = int(start + i)
                raise DegenerateConfigurationError(
                    f"samples {i} and {j} coincide up to sign; gradient undefined",
                    pair=(min(i, int(j)), max(i, int(j))),
                )
        em = _masked_ei(zm, c)
        ep = _masked_ei(zp, c)
        partial.append(float(np.sum(_t_term(zm, c, em, b_max) + _t_term(zp, c, ep, b_max))))
        if want_grad:
            grad[start:stop] = rows * (em.sum(axis=1) + ep.sum(axis=1))[:, None] + (ep - em) @ s
    return math.fsum(partial), grad


def _d2_terms(s: np.ndarray, cfg: DistanceConfig, want_grad: bool):
    """Even-case D2 and (optionally) its gradient, on one shared quadrature grid."""
    n_half, dim = s.shape
    sq = np.einsum("ij,ij->i", s, s)
    b, w = quad_nodes_weights(cfg)
    den = 1.0 + 2.0 * b * b
    ratio = _power_ratio(2.0 * b * b, den, dim)
    with np.errstate(under="ignore"):
        kern = np.exp(-0.5 * sq[None, :] / den[:, None])  # (nodes, L)
    d2 = float(np.dot(w * (2.0 * b / (2 * n_half)) * ratio, kern.sum(axis=1)))
    grad = None
    if want_grad:
        integ = np.dot(w * (2.0 * b / den) * ratio, kern)  # (L,)
        grad = -(s / (2 * n_half)) * integ[:, None]
    if not math.isfinite(d2) or (grad is not None and not np.all(np.isfinite(grad))):
        raise NumericalError("non-finite value in D2 quadrature")
    return d2, grad


def d2_even(sset: SymmetricSampleSet, cfg: DistanceConfig) -> float:
    return _d2_terms(sset.half_positions, cfg, False)[0]


def d3_even(sset: SymmetricSampleSet, cfg: DistanceConfig) -> float:
    n_half = sset.half_count
    total, _ = _pair_sums(sset.half_positions, cfg.b_max, False)
    return 2.0 / (2 * n_half) ** 2 * total


def d2_odd(sset: SymmetricSampleSet, cfg: DistanceConfig) -> float:
    n_half = sset.half_count
    m = 2 * n_half + 1
    return (2 * n_half / m) * d2_even(sset, cfg) + _center_d2_integral(sset.dim, cfg) / m


def _center_t_sum(s: np.ndarray, b_max: float) -> float:
    c = 4.0 * b_max * b_max
    sq = np.einsum("ij,ij->i", s, s)
    return float(np.sum(_t_term(sq, c, _masked_ei(sq, c), b_max)))


def d3_odd(sset: SymmetricSampleSet, cfg: DistanceConfig) -> float:
    n_half = sset.half_count
    m = 2 * n_half + 1
    b2 = cfg.b_max ** 2
    return ((2 * n_half) ** 2 / m**2 * d3_even(sset, cfg)
            + b2 / (2 * m**2)
            + 4.0 / m**2 * _center_t_sum(sset.half_positions, cfg.b_max))


def _evaluate(s: np.ndarray, includes_center: bool, cfg: DistanceConfig, want_grad: bool):
    n_half, dim = s.shape
    two_l = 2 * n_half
    b_max = cfg.b_max
    c = 4.0 * b_max * b_max

    v1 = d1(dim, cfg)
    v2, g2 = _d2_terms(s, cfg, want_grad)
    pair_total, g3 = _pair_sums(s, b_max, want_grad)
    v3 = 2.0 / two_l**2 * pair_total
    if want_grad:
        g3 = g3 / two_l**2

    if includes_center:
        m = two_l + 1
        v2 = (two_l / m) * v2 + _center_d2_integral(dim, cfg) / m
        v3 = two_l**2 / m**2 * v3 + b_max**2 / (2 * m**2) + 4.0 / m**2 * _center_t_sum(s, b_max)
        if want_grad:
            g2 = (two_l / m) * g2
            sq = np.einsum("ij,ij->i", s, s)
            g3 = two_l**2 / m**2 * g3 + s * (_masked_ei(sq, c) / m**2)[:, None]

    total = v1 - 2.0 * v2 + v3
    if not all(math.isfinite(v) for v in (v1, v2, v3)):
        raise NumericalError("non-finite distance term")
    grad = None
    if want_grad:
        grad = -2.0 * g2 + g3
        if not np.all(np.isfinite(grad)):
            raise NumericalError("non-finite distance gradient")
    return DistanceBreakdown(v1, v2, v3, total), grad


def distance(sset: SymmetricSampleSet, cfg: DistanceConfig) -> DistanceBreakdown:
    _evaluations.value += 1
    return _evaluate(sset.half_positions, sset.includes_center, cfg, False)[0]


def gradient(sset: SymmetricSampleSet, cfg: DistanceConfig) -> np.ndarray:
    """``dD/ds_i`` as an ``L x N`` matrix; the fixed center sample has no row."""
    _evaluations.value += 1
    return _evaluate(sset.half_positions, sset.includes_center, cfg, True)[1]


def distance_and_gradient(sset: SymmetricSampleSet, cfg: DistanceConfig):
    _evaluations.value += 1
    return _evaluate(sset.half_positions, sset.includes_center, cfg, True)
