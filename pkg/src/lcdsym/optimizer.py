"""Optimal point-symmetric sample sets for the N-dimensional standard normal.

Pipeline: draw ``L`` random standard-normal half samples, minimize the LCD
distance with L-BFGS, then whiten the result so the expanded set has
identity sample covariance.
"""
from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import cholesky, solve_triangular

from .distance import DEFAULT_QUAD_NODES, DistanceConfig, distance_and_gradient
from .errors import ConfigError, DegenerateConfigurationError, RankDeficiencyError
from .mixture import SymmetricSampleSet

log = logging.getLogger(__name__)

JITTER = 1e-8


def default_b_max(dim: int) -> float:
    # 70 covers N <= 1000; small dimensions get a tighter kernel range
    return 10.0 if dim <= 10 else 70.0


@dataclass(frozen=True)
class OptimizerConfig:
    memory: int = 10
    max_iterations: int = 10_000
    grad_tolerance: float = 1e-8
    b_max: Optional[float] = None  # None: default_b_max(dim)
    seed: int = 0
    quad_nodes: int = DEFAULT_QUAD_NODES
    c1: float = 1e-4
    c2: float = 0.9

    def __post_init__(self):
        if self.memory < 3:
            raise ConfigError("memory must be >= 3")
        if not self.grad_tolerance > 0:
            raise ConfigError("grad_tolerance must be positive")
        if self.max_iterations < 0:
            raise ConfigError("max_iterations must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if not 0 < self.c1 < self.c2 < 1:
            raise ConfigError("line search needs 0 < c1 < c2 < 1")

    def distance_config(self, dim: int) -> DistanceConfig:
        b_max = self.b_max if self.b_max is not None else default_b_max(dim)
        return DistanceConfig(b_max=b_max, quad_nodes=self.quad_nodes)


@dataclass
class OptimizationReport:
    iterations: int
    final_distance: float
    final_grad_norm: float
    converged: bool
    initial_distance: float = math.nan
    evaluations: int = 0
    message: str = ""


def _rng(seed: int) -> np.random.Generator:
    # counter-based generator: identical streams across platforms
    return np.random.Generator(np.random.Philox(seed))


def draw_initial(dim: int, half_count: int, seed: int, includes_center: bool = False) -> SymmetricSampleSet:
    if dim < 1 or half_count < 1:
        raise ConfigError("dim and half_count must be >= 1")
    return SymmetricSampleSet(_rng(seed).standard_normal((half_count, dim)), includes_center)


class _Objective:
    def __init__(self, shape, includes_center, dcfg):
        self.shape = shape
        self.includes_center = includes_center
        self.dcfg = dcfg
        self.evaluations = 0

    def __call__(self, x):
        self.evaluations += 1
        sset = SymmetricSampleSet(x.reshape(self.shape), self.includes_center)
        br, g = distance_and_gradient(sset, self.dcfg)
        return br.total, g.ravel()


def _trial(obj, x):
    try:
        return obj(x)
    except DegenerateConfigurationError:
        return math.inf, None


def _cubic_min(a, fa, ga, b, fb, gb):
    """Minimizer of the cubic through (a, fa, ga) and (b, fb, gb), or None."""
    d1 = ga + gb - 3 * (fa - fb) / (a - b)
    rad = d1 * d1 - ga * gb
    if rad < 0:
        return None
    d2 = math.copysign(math.sqrt(rad), b - a)
    denom = gb - ga + 2 * d2
    if denom == 0:
        return None
    return b - (b - a) * (gb + d2 - d1) / denom


def _zoom(phi, f0, g0, lo, hi, c1, c2, max_iter=30):
    a_lo, f_lo, g_lo = lo
    a_hi, f_hi, g_hi = hi
    for _ in range(max_iter):
        a = None
        if math.isfinite(f_hi) and g_hi is not None:
            a = _cubic_min(a_lo, f_lo, g_lo, a_hi, f_hi, g_hi)
        lo_b, hi_b = sorted((a_lo, a_hi))
        width = hi_b - lo_b
        if a is None or not (lo_b + 0.1 * width <= a <= hi_b - 0.1 * width):
            a = 0.5 * (a_lo + a_hi)
        if width <= 1e-16 * max(1.0, hi_b):
            return None
        fa, ga, full = phi(a)
        if not math.isfinite(fa) or fa > f0 + c1 * a * g0 or fa >= f_lo:
            a_hi, f_hi, g_hi = a, fa, ga
        else:
            if abs(ga) <= -c2 * g0:
                return a, full
            if ga * (a_hi - a_lo) >= 0:
                a_hi, f_hi, g_hi = a_lo, f_lo, g_lo
            a_lo, f_lo, g_lo = a, fa, ga
    return None


def _strong_wolfe(obj, x, f0, g, d, alpha0, c1, c2, max_iter=25):
    """Line search along ``d`` satisfying the strong Wolfe conditions.

    Returns ``(alpha, (f, grad))`` or None.
    """
    slope0 = float(g @ d)

    def phi(a):
        f, grad = _trial(obj, x + a * d)
        if grad is None:
            return f, None, (f, grad)
        return f, float(grad @ d), (f, grad)

    a_prev, f_prev, s_prev = 0.0, f0, slope0
    a = alpha0
    for i in range(max_iter):
        fa, sa, full = phi(a)
        if not math.isfinite(fa):
            # overshoot into a degenerate or non-finite region: shrink
            return _zoom(phi, f0, slope0, (a_prev, f_prev, s_prev), (a, fa, None), c1, c2)
        if fa > f0 + c1 * a * slope0 or (i > 0 and fa >= f_prev):
            return _zoom(phi, f0, slope0, (a_prev, f_prev, s_prev), (a, fa, sa), c1, c2)
        if abs(sa) <= -c2 * slope0:
            return a, full
        if sa >= 0:
            return _zoom(phi, f0, slope0, (a, fa, sa), (a_prev, f_prev, s_prev), c1, c2)
        a_prev, f_prev, s_prev = a, fa, sa
        a *= 2.0
    return None


def _two_loop(g, history):
    q = g.copy()
    alphas = []
    for s, y, rho in reversed(history):
        a = rho * (s @ q)
        alphas.append(a)
        q -= a * y
    if history:
        s, y, _ = history[-1]
        q *= (s @ y) / (y @ y)
    for (s, y, rho), a in zip(history, reversed(alphas)):
        b = rho * (y @ q)
        q += (a - b) * s
    return -q


def _jitter_degenerate(x, shape, includes_center, dcfg, seed):
    rng = _rng(seed ^ 0x9E3779B97F4A7C15)
    for _ in range(100):
        try:
            distance_and_gradient(SymmetricSampleSet(x.reshape(shape), includes_center), dcfg)
            return x
        except DegenerateConfigurationError as exc:
            _, j = exc.pair
            log.warning("coincident samples %s; jittering sample %d by %g", exc.pair, j, JITTER)
            x = x.reshape(shape).copy()
            x[j] += JITTER * rng.standard_normal(shape[1])
            x = x.ravel()
    raise DegenerateConfigurationError("could not resolve coincident samples by jittering")


def minimize(initial: SymmetricSampleSet, cfg: OptimizerConfig):
    """L-BFGS on the LCD distance; returns ``(optimized_set, report)``.

    Only ``memory`` pairs of ``L*N`` vectors are stored, never a Hessian.
    Stops on the gradient infinity norm, the iteration budget, or a line
    search failure (best iterate so far is returned, ``converged=False``).
    """
    shape = initial.half_positions.shape
    center = initial.includes_center
    dcfg = cfg.distance_config(initial.dim)
    obj = _Objective(shape, center, dcfg)

    x = _jitter_degenerate(initial.half_positions.ravel().copy(), shape, center, dcfg, cfg.seed)
    f, g = obj(x)
    f_init = f
    history = deque(maxlen=cfg.memory)
    gnorm = float(np.max(np.abs(g)))
    converged = gnorm <= cfg.grad_tolerance
    message = "gradient tolerance reached" if converged else "iteration budget exhausted"
    it = 0
    while not converged and it < cfg.max_iterations:
        d = _two_loop(g, history)
        if g @ d >= 0:
            history.clear()
            d = -g
        alpha0 = 1.0 if history else min(1.0, 1.0 / max(gnorm, 1e-300))
        res = _strong_wolfe(obj, x, f, g, d, alpha0, cfg.c1, cfg.c2)
        if res is None and history:
            history.clear()
            d = -g
            res = _strong_wolfe(obj, x, f, g, d, min(1.0, 1.0 / gnorm), cfg.c1, cfg.c2)
        if res is None:
            message = "line search failed"
            break
        alpha, (f_new, g_new) = res
        x_new = x + alpha * d
        s_vec, y_vec = x_new - x, g_new - g
        sy = float(s_vec @ y_vec)
        if sy > 1e-12 * float(np.linalg.norm(s_vec) * np.linalg.norm(y_vec)):
            history.append((s_vec, y_vec, 1.0 / sy))
        x, f, g = x_new, f_new, g_new
        gnorm = float(np.max(np.abs(g)))
        it += 1
        if gnorm <= cfg.grad_tolerance:
            converged = True
            message = "gradient tolerance reached"

    report = OptimizationReport(
        iterations=it,
        final_distance=f,
        final_grad_norm=gnorm,
        converged=converged,
        initial_distance=f_init,
        evaluations=obj.evaluations,
        message=message,
    )
    return SymmetricSampleSet(x.reshape(shape), center), report


def mahalanobis_normalize(sset: SymmetricSampleSet) -> SymmetricSampleSet:
    """Whiten the half samples so the expanded set has identity covariance.

    ``C = (2/M) sum z_i z_i^T = G G^T`` (Cholesky, ``G`` lower) and
    ``s_i = G^{-1} z_i``.
    """
    z = sset.half_positions
    n_half, dim = z.shape
    if n_half < dim:
        raise RankDeficiencyError(
            f"sample covariance has rank <= {n_half} < dimension {dim}; "
            f"need at least 2N = {2 * dim} samples"
        )
    cz = (2.0 / sset.total_samples) * (z.T @ z)
    try:
        g = cholesky(cz, lower=True)
    except np.linalg.LinAlgError as exc:
        raise RankDeficiencyError(f"sample covariance is not positive definite: {exc}") from None
    diag = np.abs(np.diag(g))
    if diag.min() <= 1e-12 * diag.max():
        raise RankDeficiencyError(
            f"sample covariance is numerically rank deficient (pivot ratio {diag.min() / diag.max():.3g})"
        )
    s = solve_triangular(g, z.T, lower=True).T
    return sset.with_positions(s)


def optimize(dim: int, total_samples: int, cfg: OptimizerConfig = OptimizerConfig()):
    """Full pipeline for ``M = total_samples`` samples in ``N = dim`` dimensions.

    Even ``M`` gives ``L = M/2`` mirrored pairs; odd ``M`` adds a fixed
    sample at the origin with ``L = (M-1)/2``.
    """
    if dim < 1:
        raise ConfigError("dimension must be >= 1")
    if total_samples < 2 or total_samples < 2 * dim:
        raise ConfigError(
            f"M = {total_samples} < 2N = {2 * dim}: the symmetric set would have "
            f"rank-deficient sample covariance"
        )
    half, center = divmod(total_samples, 2)
    initial = draw_initial(dim, half, cfg.seed, includes_center=bool(center))
    optimized, report = minimize(initial, cfg)
    return mahalanobis_normalize(optimized), report
