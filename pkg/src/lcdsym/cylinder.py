"""Extended-object tracking of a cylinder with a random hypersurface model.

State layout (12 entries)::

    0:3   position c          3:6   velocity
    6:8   angles (phi_x, phi_y)  8:10  angular rates
    10    radius r            11    length l

Rotations are right-handed about the world x and y axes and composed as
``R = R_y(phi_y) @ R_x(phi_x)``; the cylinder axis is ``R @ e_z``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .gaussian import GaussianDensity
from .lrkf import MeasurementModel, StateEstimate

STATE_DIM = 12
POS, VEL, ANG, RATE = slice(0, 3), slice(3, 6), slice(6, 8), slice(8, 10)
RADIUS, LENGTH = 10, 11
POINT_NOISE_DIM = 4  # v (3) and the axial scale s
MEAS_NOISE_VAR = 0.01
AXIAL_VAR = 1.0 / 12.0  # variance of U(-0.5, 0.5)
DEFAULT_BATCH = 20


def system_matrix() -> np.ndarray:
    a = np.eye(STATE_DIM)
    a[POS, VEL] = np.eye(3)
    a[ANG, RATE] = np.eye(2)
    return a


def process_noise() -> GaussianDensity:
    var = [1e-6] * 3 + [1e-4] * 3 + [1e-10] * 2 + [1e-5] * 2 + [1e-4] * 2
    return GaussianDensity(np.zeros(STATE_DIM), np.diag(var))


def rotation(phi_x: float, phi_y: float) -> np.ndarray:
    cx, sx, cy, sy = math.cos(phi_x), math.sin(phi_x), math.cos(phi_y), math.sin(phi_y)
    rx = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]])
    ry = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]])
    return ry @ rx


def axis(state) -> np.ndarray:
    state = np.asarray(state, dtype=np.float64)
    return rotation(state[6], state[7])[:, 2]


def _to_body(d, phi_x, phi_y):
    """``(R_y R_x)^T d`` for rows of ``d`` with per-row angles."""
    cx, sx, cy, sy = np.cos(phi_x), np.sin(phi_x), np.cos(phi_y), np.sin(phi_y)
    u0 = cy * d[:, 0] - sy * d[:, 2]
    u1 = d[:, 1]
    u2 = sy * d[:, 0] + cy * d[:, 2]
    return u0, cx * u1 + sx * u2, -sx * u1 + cx * u2


def residuals(states, point, v, s) -> np.ndarray:
    """Implicit measurement residuals for one observed surface point.

    ``states`` is ``M x 12``, ``point`` a 3-vector, ``v`` is ``M x 3`` additive
    noise and ``s`` length ``M`` axial scale.  Returns ``M x 3`` rows
    ``[mx^2 + my^2 - r^2, mz - s l, (mz - s l)^2]``.
    """
    states = np.atleast_2d(states)
    d = np.asarray(point, dtype=np.float64) - np.atleast_2d(v) - states[:, POS]
    mx, my, mz = _to_body(d, states[:, 6], states[:, 7])
    axial = mz - np.asarray(s) * states[:, LENGTH]
    return np.column_stack([mx * mx + my * my - states[:, RADIUS] ** 2, axial, axial * axial])


def measure(state, point, v, s) -> np.ndarray:
    return residuals(np.asarray(state)[None, :], point, np.asarray(v)[None, :], np.atleast_1d(s))[0]


def stacked_residuals(states, points, noises) -> np.ndarray:
    """Residuals for a batch of points; ``noises`` is ``M x 4K`` laid out as
    ``[v_1, s_1, v_2, s_2, ...]``.  Returns ``M x 3K`` in point order."""
    points = np.asarray(points, dtype=np.float64)
    states = np.atleast_2d(states)
    noises = np.atleast_2d(noises)
    k = points.shape[0]
    if noises.shape[1] != POINT_NOISE_DIM * k:
        raise ConfigError(f"expected {POINT_NOISE_DIM * k} noise columns for {k} points, got {noises.shape[1]}")
    blocks = []
    for i in range(k):
        nz = noises[:, POINT_NOISE_DIM * i: POINT_NOISE_DIM * (i + 1)]
        blocks.append(residuals(states, points[i], nz[:, :3], nz[:, 3]))
    return np.hstack(blocks)


def stacked_measure(state, points, noises, batch_size: int = DEFAULT_BATCH) -> np.ndarray:
    points = np.asarray(points)
    if points.shape != (batch_size, 3):
        raise ConfigError(f"expected a batch of {batch_size} points, got shape {points.shape}")
    return stacked_residuals(np.asarray(state)[None, :], points, np.asarray(noises).reshape(1, -1))[0]


def measurement_noise(k: int) -> GaussianDensity:
    var = np.tile([MEAS_NOISE_VAR] * 3 + [AXIAL_VAR], k)
    return GaussianDensity(np.zeros(POINT_NOISE_DIM * k), np.diag(var))


def measurement_model(points) -> MeasurementModel:
    """Stacked RHM model for one batch; the pseudo-measurement is zero."""
    points = np.array(points, dtype=np.float64)
    k = points.shape[0]
    return MeasurementModel(
        func=lambda x, v: stacked_residuals(x, points, v),
        noise=measurement_noise(k),
        dim=3 * k,
    )


@dataclass(frozen=True)
class TrajectoryConfig:
    steps: int = 50
    points_per_step: int = DEFAULT_BATCH
    loop_radius: float = 3.0
    loop_period: float = 500.0
    heave_amplitude: float = 0.5
    roll_amplitude: float = 0.4
    pitch_amplitude: float = 0.3
    angle_period: float = 250.0
    initial_radius: float = 0.3
    initial_length: float = 1.0
    # (step, value) pairs applied from that step on
    radius_changes: tuple = ((300, 0.4),)
    length_changes: tuple = ((200, 1.5), (400, 0.5))
    noise_var: float = MEAS_NOISE_VAR

    def __post_init__(self):
        if self.steps < 1 or self.points_per_step < 1:
            raise ConfigError("steps and points_per_step must be >= 1")


def shape_at(cfg: TrajectoryConfig, k: int):
    r, l = cfg.initial_radius, cfg.initial_length
    for step, val in cfg.radius_changes:
        if k >= step:
            r = val
    for step, val in cfg.length_changes:
        if k >= step:
            l = val
    return r, l


def _pose(cfg: TrajectoryConfig, t: float):
    w = 2 * math.pi / cfg.loop_period
    wa = 2 * math.pi / cfg.angle_period
    c = np.array([
        cfg.loop_radius * math.sin(w * t),
        cfg.loop_radius * (1 - math.cos(w * t)),
        cfg.heave_amplitude * math.sin(2 * w * t),
    ])
    phi = np.array([cfg.roll_amplitude * math.sin(wa * t), cfg.pitch_amplitude * math.sin(0.5 * wa * t)])
    return c, phi


def ground_truth(cfg: TrajectoryConfig) -> np.ndarray:
    """``(steps + 1) x 12`` true states; rates are forward differences."""
    out = np.zeros((cfg.steps + 1, STATE_DIM))
    for k in range(cfg.steps + 1):
        c, phi = _pose(cfg, k)
        c1, phi1 = _pose(cfg, k + 1)
        r, l = shape_at(cfg, k)
        out[k] = np.concatenate([c, c1 - c, phi, phi1 - phi, [r, l]])
    return out


def surface_points(state, n: int, rng: np.random.Generator, noise_var: float = MEAS_NOISE_VAR) -> np.ndarray:
    """Noisy points on the lateral surface of the cylinder in ``state``."""
    theta = rng.uniform(0.0, 2 * math.pi, n)
    s = rng.uniform(-0.5, 0.5, n)
    r, l = state[RADIUS], state[LENGTH]
    local = np.column_stack([r * np.cos(theta), r * np.sin(theta), s * l])
    world = state[POS] + local @ rotation(state[6], state[7]).T
    return world + math.sqrt(noise_var) * rng.standard_normal((n, 3))


def simulate_trajectory(cfg: TrajectoryConfig, seed: int):
    """Ground truth and one batch of surface measurements per step (step 0 included)."""
    truth = ground_truth(cfg)
    rng = np.random.Generator(np.random.Philox(seed))
    meas = np.stack([surface_points(x, cfg.points_per_step, rng, cfg.noise_var) for x in truth])
    return truth, meas


def initial_estimate(points) -> StateEstimate:
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] < 2:
        raise ConfigError("need at least two points to initialize the position covariance")
    mean = np.zeros(STATE_DIM)
    mean[POS] = points.mean(axis=0)
    mean[RADIUS], mean[LENGTH] = 1.0, 2.0
    cc = np.cov(points.T)
    if np.linalg.eigvalsh(cc)[0] <= 1e-12:
        cc = cc + 1e-6 * np.eye(3)
    cov = np.zeros((STATE_DIM, STATE_DIM))
    cov[POS, POS] = cc
    cov[3:6, 3:6] = 1e-3 * np.eye(3)
    cov[6:10, 6:10] = 1e-7 * np.eye(4)
    cov[10:, 10:] = 1e-2 * np.eye(2)
    return StateEstimate(0, GaussianDensity(mean, cov))


def volume(state) -> float:
    return math.pi * abs(state[RADIUS]) ** 2 * abs(state[LENGTH])


def axis_angle(est_state, true_state) -> float:
    """Angle between the estimated and true longitudinal axes, in ``[0, pi/2]``."""
    c = abs(float(axis(est_state) @ axis(true_state)))
    return math.acos(min(1.0, c))
