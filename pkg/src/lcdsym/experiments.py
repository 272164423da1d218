"""Experiment drivers: moment errors, the symmetric-measurement scenario and
cylinder tracking.  Results are plain records; :func:`write_csv` renders them
deterministically."""
from __future__ import annotations

import csv
import io
import itertools
import logging
import math
import sys
import time
from dataclasses import astuple, dataclass, fields, replace
from typing import Sequence

import numpy as np

from . import cylinder
from .baselines import ukf_equal
from .errors import ConfigError, NumericalError
from .gaussian import GaussianDensity
from .lrkf import MeasurementModel, StateEstimate, kalman_update, measurement_moments, predict_linear, update
from .mixture import DiracMixture, expand, raw_moment, true_normal_moment
from .optimizer import OptimizerConfig
from .schemes import make_sampler, seed_root, symmetric_set

log = logging.getLogger(__name__)

MOMENT_BUDGET = 10**8
NO_UPDATE = "no-update"


def _philox(seed) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


# ---------------------------------------------------------------- moments

def moment_error(mix: DiracMixture, order: int, budget: int = MOMENT_BUDGET) -> float:
    """RMS difference to the standard-normal moments over all ``N^m`` ordered
    exponent tuples of total order ``m``.

    Each multiset of coordinates is evaluated once and weighted by the number
    of orderings it stands for.
    """
    if order < 1:
        raise ConfigError("moment order must be >= 1")
    n = mix.dim
    total = n ** order
    if total > budget:
        raise ConfigError(
            f"N^m = {n}^{order} = {total} exceeds the moment budget {budget}; "
            "lower the order or raise the budget")
    acc = []
    for combo in itertools.combinations_with_replacement(range(n), order):
        exps = [0] * n
        for j in combo:
            exps[j] += 1
        count = math.factorial(order)
        for e in exps:
            count //= math.factorial(e)
        diff = true_normal_moment(exps) - raw_moment(mix, exps)
        acc.append(count * diff * diff)
    return math.sqrt(math.fsum(acc) / total)


@dataclass(frozen=True)
class MomentErrorRecord:
    scheme: str
    dim: int
    samples: int
    order: int
    error: float
    runs: int


def _is_stochastic(spec: str) -> bool:
    return spec.split(":")[0].lower() in ("s2kf", "rukf")


def _scheme_draw(spec, dim, run_seed, base_seed, cfg, root, force_recompute, allow_compute):
    name = spec.split(":")[0].lower()
    if name == "s2kf":
        sampler = make_sampler(spec, run_seed, cfg, seed_root(root, run_seed, base_seed),
                               force_recompute, allow_compute)
    else:
        sampler = make_sampler(spec, run_seed, cfg, root, force_recompute, allow_compute)
    return sampler(dim)


def run_moment_study(dims: Sequence[int] = (3, 6), orders: Sequence[int] = (4, 6, 8),
                     schemes: Sequence[str] = ("s2kf:25", "ukf", "ckf5", "ghkf", "rukf:5"),
                     runs: int = 10, seed: int = 0, cfg: OptimizerConfig = OptimizerConfig(),
                     root=None, force_recompute: bool = False, allow_compute: bool = True,
                     budget: int = MOMENT_BUDGET) -> list[MomentErrorRecord]:
    """Normalized moment errors per (scheme, N, m).

    Deterministic schemes are evaluated once; ``s2kf`` and ``rukf`` are
    averaged over ``runs`` seeds ``seed, seed + 1, ...``.  S2KF sets for the
    base seed live in the cache root, the others in ``seed-<k>`` subfolders.
    """
    if runs < 1:
        raise ConfigError("runs must be >= 1")
    out = []
    for spec in schemes:
        for dim in dims:
            n_runs = runs if _is_stochastic(spec) else 1
            errs = {m: [] for m in orders}
            size = None
            for r in range(n_runs):
                mix = _scheme_draw(spec, dim, seed + r, seed, cfg, root, force_recompute, allow_compute)
                size = mix.size
                for m in orders:
                    errs[m].append(moment_error(mix, m, budget))
            for m in orders:
                out.append(MomentErrorRecord(spec, dim, size, m, math.fsum(errs[m]) / n_runs, n_runs))
    return out


# ------------------------------------------------------- symmetric scenario

SYM_TRUTH = np.array([1.0, 2.0])
SYM_PRIOR = GaussianDensity(np.zeros(2), np.diag([4.0, 0.5]))
SYM_NOISE_VAR = 0.01
SYM_SAMPLES = 11


def distance_model(noise_var: float = SYM_NOISE_VAR) -> MeasurementModel:
    return MeasurementModel(
        func=lambda x, v: np.hypot(x[:, 0], x[:, 1])[:, None] + v,
        noise=GaussianDensity(np.zeros(1), np.array([[noise_var]])),
        dim=1,
    )


def asymmetric_surrogate(dim: int, total: int, seed: int) -> DiracMixture:
    """Random equally weighted set with zero mean and identity covariance,
    but no point symmetry."""
    z = _philox(seed).standard_normal((total, dim))
    z -= z.mean(axis=0)
    c = z.T @ z / total
    g = np.linalg.cholesky(c)
    return DiracMixture(np.linalg.solve(g, z.T).T, np.full(total, 1.0 / total))


@dataclass(frozen=True)
class ScenarioResult:
    estimator: str
    samples: int
    mean_rmse: float
    cov_rmse: float
    max_cross_cov: float


def run_symmetric_scenario(runs: int = 100, seed: int = 0, cfg: OptimizerConfig = OptimizerConfig(),
                           root=None, force_recompute: bool = False,
                           allow_compute: bool = True) -> list[ScenarioResult]:
    """Distance measurement of a 2-D state whose prior is centred on the origin.

    A point-symmetric scheme sees an even function of the deviations, so
    the cross-covariance vanishes and the posterior equals the prior.
    The symmetric S2KF and the surrogate draw a new set per run.
    """
    if runs < 1:
        raise ConfigError("runs must be >= 1")
    model = distance_model()
    joint_dim = SYM_PRIOR.dim + model.noise.dim
    rng = _philox(seed)
    ys = math.hypot(*SYM_TRUTH) + math.sqrt(SYM_NOISE_VAR) * rng.standard_normal(runs)
    estimators = {
        "s2kf-symmetric": lambda r: expand(symmetric_set(
            joint_dim, SYM_SAMPLES, replace(cfg, seed=seed + r), seed_root(root, seed + r, seed),
            force_recompute, allow_compute)),
        "asymmetric-surrogate": lambda r: asymmetric_surrogate(joint_dim, SYM_SAMPLES, seed + r),
        "ukf": lambda r: ukf_equal(joint_dim, "even"),
    }
    out = []
    for name, draw in estimators.items():
        dm, dc, cross = [], [], 0.0
        size = 0
        for r in range(runs):
            mix = draw(r)
            size = mix.size
            mom = measurement_moments(SYM_PRIOR, model, lambda d, mix=mix: mix)
            post = kalman_update(SYM_PRIOR, ys[r], mom)
            cross = max(cross, float(np.max(np.abs(mom.cross_covariance))))
            dm.append(float(np.sum((post.mean - SYM_PRIOR.mean) ** 2)))
            dc.append(float(np.sum((post.covariance - SYM_PRIOR.covariance) ** 2)))
        out.append(ScenarioResult(name, size, math.sqrt(math.fsum(dm) / runs),
                                  math.sqrt(math.fsum(dc) / runs), cross))
    return out


# --------------------------------------------------------------- tracking

def table_sample_counts(joint_dim: int = 92) -> dict:
    """Update-step sample counts of the tracking comparison."""
    per_iter = 2 * joint_dim
    return {
        "ckf5": 2 * joint_dim**2 + 1,
        "rukf:5": 5 * per_iter + 1,
        "rukf:10": 10 * per_iter + 1,
        "s2kf:461": 5 * joint_dim + 1,
        "s2kf:1841": 10 * per_iter + 1,
    }


DESK_SCHEMES = ("s2kf:461",)
FULL_SCHEMES = ("ckf5", "rukf:5", "rukf:10", "s2kf:461", "s2kf:1841")


@dataclass(frozen=True)
class TrackingRow:
    scheme: str
    step: int
    position_rmse: float
    angle_rmse: float
    volume_rmse: float
    runs_ok: int


@dataclass(frozen=True)
class RunTiming:
    scheme: str
    run: int
    update_seconds: float
    diverged_at: int  # -1 if the run finished


@dataclass
class TrackingResult:
    rows: list
    timings: list

    def mean_position_rmse(self, scheme: str) -> float:
        vals = [r.position_rmse for r in self.rows if r.scheme == scheme and r.step > 0]
        return math.fsum(vals) / len(vals)

    def diverged(self, scheme: str) -> list:
        return [t.run for t in self.timings if t.scheme == scheme and t.diverged_at >= 0]


def _errors(est: StateEstimate, truth) -> tuple:
    x = est.mean
    return (float(np.linalg.norm(x[cylinder.POS] - truth[cylinder.POS])),
            cylinder.axis_angle(x, truth),
            cylinder.volume(x) - cylinder.volume(truth))


def _track_run(truth, meas, sampler, covariances_ok):
    """Errors per step (NaN after divergence), update time, divergence step."""
    steps = truth.shape[0] - 1
    errs = np.full((steps + 1, 3), np.nan)
    a, q = cylinder.system_matrix(), cylinder.process_noise()
    spent = 0.0
    k = 0
    try:
        est = cylinder.initial_estimate(meas[0])
        errs[0] = _errors(est, truth[0])
        for k in range(1, steps + 1):
            est = predict_linear(est, a, q)
            if sampler is not None:
                t0 = time.perf_counter()
                est = update(est, np.zeros(3 * meas.shape[1]), cylinder.measurement_model(meas[k]), sampler)
                spent += time.perf_counter() - t0
            covariances_ok(est)
            errs[k] = _errors(est, truth[k])
    except NumericalError as exc:
        log.warning("run diverged at step %d: %s", k, exc)
        return errs, spent, k
    return errs, spent, -1


def _check_cov(est: StateEstimate):
    if not np.all(np.isfinite(est.mean)) or np.linalg.eigvalsh(est.covariance)[0] < -1e-10:
        raise NumericalError("state estimate is not finite and PSD")


def run_cylinder_tracking(traj: cylinder.TrajectoryConfig = cylinder.TrajectoryConfig(), runs: int = 5,
                          schemes: Sequence[str] = DESK_SCHEMES, seed: int = 0,
                          cfg: OptimizerConfig = OptimizerConfig(), root=None,
                          force_recompute: bool = False, allow_compute: bool = True,
                          include_baseline: bool = True) -> TrackingResult:
    """Track the cylinder with each scheme; run ``r`` uses the trajectory and
    measurements of seed ``seed + r`` for every scheme."""
    if runs < 1:
        raise ConfigError("runs must be >= 1")
    data = [cylinder.simulate_trajectory(traj, seed + r) for r in range(runs)]
    names = list(schemes) + ([NO_UPDATE] if include_baseline else [])
    joint_dim = cylinder.STATE_DIM + cylinder.POINT_NOISE_DIM * traj.points_per_step
    rows, timings = [], []
    for name in names:
        per_run = []
        shared = None
        if name != NO_UPDATE and not name.lower().startswith("rukf"):
            # one set serves every run; generate it outside the timed updates
            shared = make_sampler(name, seed, cfg, root, force_recompute, allow_compute)
            shared(joint_dim)
        for r, (truth, meas) in enumerate(data):
            sampler = shared
            if name.lower().startswith("rukf"):
                sampler = make_sampler(name, seed + r)
            errs, spent, div = _track_run(truth, meas, sampler, _check_cov)
            per_run.append(errs)
            timings.append(RunTiming(name, r, spent, div))
        stack = np.stack(per_run)
        for k in range(traj.steps + 1):
            ok = ~np.isnan(stack[:, k, 0])
            n_ok = int(ok.sum())
            if n_ok:
                rmse = np.sqrt(np.mean(stack[ok, k, :] ** 2, axis=0))
            else:
                rmse = np.full(3, np.nan)
            rows.append(TrackingRow(name, k, *map(float, rmse), n_ok))
    return TrackingResult(rows, timings)


# -------------------------------------------------------------------- CSV

def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def render_csv(records) -> str:
    records = list(records)
    if not records:
        return ""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f.name for f in fields(records[0])])
    for rec in records:
        w.writerow([_fmt(v) for v in astuple(rec)])
    return buf.getvalue()


def write_csv(records, path=None) -> None:
    text = render_csv(records)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
