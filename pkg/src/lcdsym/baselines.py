"""Comparison sampling schemes for the standard normal.

Every set is laid out with mirrored rows (``+x`` rows, then ``-x`` rows, then
an optional origin row) so the moment routines can pair them.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from .errors import ConfigError
from .mixture import DiracMixture, raw_moment, true_normal_moment

GHKF_MAX_DIM = 25


def _mirrored(half: np.ndarray, half_weights: np.ndarray, center_weight=None) -> DiracMixture:
    rows = [half, -half]
    weights = [half_weights, half_weights]
    if center_weight is not None:
        rows.append(np.zeros((1, half.shape[1])))
        weights.append(np.array([center_weight]))
    return DiracMixture(np.vstack(rows), np.concatenate(weights))


def ukf_equal(dim: int, parity: str = "even") -> DiracMixture:
    """Equally weighted UKF set: ``+-sqrt(N) e_i``, or ``+-sqrt(N + 1/2) e_i`` plus origin."""
    if dim < 1:
        raise ConfigError("dimension must be >= 1")
    if parity == "even":
        return _mirrored(math.sqrt(dim) * np.eye(dim), np.full(dim, 1.0 / (2 * dim)))
    if parity == "odd":
        w = 1.0 / (2 * dim + 1)
        return _mirrored(math.sqrt(dim + 0.5) * np.eye(dim), np.full(dim, w), w)
    raise ConfigError(f"parity must be 'even' or 'odd', got {parity!r}")


def _ckf5_half_points(dim: int):
    axial = math.sqrt(dim + 2.0) * np.eye(dim)
    c = math.sqrt((dim + 2.0) / 2.0)
    diag = []
    for i, j in itertools.combinations(range(dim), 2):
        for sign in (1.0, -1.0):
            p = np.zeros(dim)
            p[i], p[j] = c, sign * c
            diag.append(p)
    return axial, np.array(diag).reshape(-1, dim)


def ckf5(dim: int) -> DiracMixture:
    """Fifth-degree spherical-radial rule with ``2N^2 + 1`` points.

    Points: origin, ``+-sqrt(N+2) e_i`` and ``+-sqrt((N+2)/2) (e_i +- e_j)``.
    The three weights are solved from the degree-5 moment conditions
    (mass, ``E[x1^2]``, ``E[x1^4]``, ``E[x1^2 x2^2]``).  The axial weight is
    ``(4-N)/(2(N+2)^2)``: zero for ``N = 4`` and negative above.
    """
    if dim < 2:
        raise ConfigError("the fifth-degree cubature rule needs N >= 2")
    axial, diag = _ckf5_half_points(dim)
    conditions = [(0,) * dim, (2,) + (0,) * (dim - 1), (4,) + (0,) * (dim - 1), (2, 2) + (0,) * (dim - 2)]

    def group_moment(points, exps):
        return 2.0 * float(np.sum(np.prod(points ** np.array(exps), axis=1)))

    a = np.array([
        [1.0 if sum(e) == 0 else 0.0, group_moment(axial, e), group_moment(diag, e)]
        for e in conditions
    ])
    rhs = np.array([true_normal_moment(e) for e in conditions])
    w, *_ = np.linalg.lstsq(a, rhs, rcond=None)
    if not np.all(np.isfinite(w)) or np.max(np.abs(a @ w - rhs)) > 1e-12:
        raise ConfigError(f"no consistent fifth-degree weights for N={dim}")
    w0, w_axial, w_diag = w
    half = np.vstack([axial, diag])
    half_w = np.concatenate([np.full(len(axial), w_axial), np.full(len(diag), w_diag)])
    w0 = 1.0 - 2.0 * math.fsum(half_w)
    return _mirrored(half, half_w, w0)


def hermite_rule(nodes: int):
    """Gauss–Hermite nodes/weights for the standard normal (Golub–Welsch)."""
    off = np.sqrt(np.arange(1, nodes, dtype=np.float64))
    jacobi = np.diag(off, 1) + np.diag(off, -1)
    x, vec = np.linalg.eigh(jacobi)
    w = vec[0] ** 2
    return x, w / w.sum()


def ghkf(dim: int, nodes_per_axis: int = 2) -> DiracMixture:
    """Tensor-product Gauss–Hermite rule with two nodes per axis (``2^N`` points)."""
    if nodes_per_axis != 2:
        raise ConfigError("only the two-node Gauss–Hermite rule is supported")
    if dim < 1:
        raise ConfigError("dimension must be >= 1")
    if dim > GHKF_MAX_DIM:
        raise ConfigError(f"GHKF needs 2^{dim} samples; refusing N > {GHKF_MAX_DIM}")
    x, w = hermite_rule(nodes_per_axis)
    for k in range(4):
        exact = sum(wi * xi**k for wi, xi in zip(w, x))
        if abs(exact - true_normal_moment((k,))) > 1e-14:
            raise ConfigError("Hermite rule fails polynomial exactness")
    node = float(np.max(x))
    # first coordinate +node in the half, the rest all sign patterns
    patterns = list(itertools.product((node, -node), repeat=dim - 1))
    tails = np.array(patterns, dtype=np.float64).reshape(len(patterns), dim - 1)
    half = np.hstack([np.full((len(tails), 1), node), tails])
    return _mirrored(half, np.full(len(half), 0.5 ** dim))


def haar_orthogonal(dim: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def rukf(dim: int, iterations: int, seed: int, radius_dof=None) -> DiracMixture:
    """Randomized UKF set with ``iterations * 2N + 1`` samples.

    Each iteration rotates the axis set by a Haar-random orthogonal matrix
    and stretches it to radius ``rho`` with ``rho^2 ~ chi^2(radius_dof)``
    (default ``N + 2``).  The axis points get weight ``1/(2 rho^2)`` and the
    origin ``1 - N/rho^2``, so each iteration has zero mean and identity
    covariance; the iterations are averaged and share one origin sample.
    """
    if iterations < 1:
        raise ConfigError("iterations must be >= 1")
    if dim < 1:
        raise ConfigError("dimension must be >= 1")
    dof = dim + 2 if radius_dof is None else radius_dof
    rng = np.random.Generator(np.random.Philox(seed))
    blocks, weights = [], []
    for _ in range(iterations):
        u = haar_orthogonal(dim, rng)
        rho2 = rng.chisquare(dof)
        blocks.append(math.sqrt(rho2) * u.T)
        weights.append(np.full(dim, 1.0 / (2.0 * rho2 * iterations)))
    half_w = np.concatenate(weights)
    return _mirrored(np.vstack(blocks), half_w, 1.0 - 2.0 * math.fsum(half_w))


def moments_exact_through(mix: DiracMixture, order: int, tol: float = 1e-12) -> bool:
    for m in range(order + 1):
        for combo in itertools.combinations_with_replacement(range(mix.dim), m):
            exps = [0] * mix.dim
            for j in combo:
                exps[j] += 1
            if abs(raw_moment(mix, exps) - true_normal_moment(exps)) > tol:
                return False
    return True
