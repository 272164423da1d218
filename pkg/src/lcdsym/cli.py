"""Command line entry point ``lcdsym``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 cache integrity error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from . import cache, distance, experiments
from .cylinder import TrajectoryConfig
from .errors import CacheIntegrityError, ConfigError, NumericalError
from .optimizer import OptimizerConfig
from .schemes import obtain

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_CACHE = 0, 2, 3, 4


def _int_list(text: str):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _str_list(text: str):
    return [t.strip() for t in text.split(",") if t.strip()]


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--cache-dir", default=None, help="sample cache directory (default $LCDSYM_CACHE_DIR or ./sample-cache/)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quad-nodes", type=int, default=distance.DEFAULT_QUAD_NODES)
    p.add_argument("--b-max", type=float, default=None)
    p.add_argument("--max-iterations", type=int, default=10_000)
    p.add_argument("--force-recompute", action="store_true", help="ignore cached sets and optimize anew")
    p.add_argument("--no-compute", action="store_true", help="fail on a cache miss instead of optimizing")
    p.add_argument("-o", "--output", default=None, help="CSV output path (default stdout)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="lcdsym", description="Symmetric LCD sample sets and sample-based Kalman filtering")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="optimize and cache a standard-normal sample set")
    g.add_argument("-n", "--dim", type=int, required=True)
    g.add_argument("-m", "--samples", type=int, required=True)

    c = sub.add_parser("cache", parents=[common], help="inspect the sample cache")
    c.add_argument("action", choices=("list", "validate", "purge"))

    m = sub.add_parser("moments", parents=[common], help="normalized moment errors")
    m.add_argument("-n", "--dims", type=_int_list, default=[3, 6])
    m.add_argument("--orders", type=_int_list, default=[4, 6, 8])
    m.add_argument("--schemes", type=_str_list, default=["s2kf:25", "ukf", "ckf5", "ghkf", "rukf:5"])
    m.add_argument("--runs", type=int, default=10, help="seeded runs for s2kf and rukf")
    m.add_argument("--budget", type=int, default=experiments.MOMENT_BUDGET)

    s = sub.add_parser("symmetric", parents=[common], help="symmetric distance-measurement scenario")
    s.add_argument("--runs", type=int, default=100)

    t = sub.add_parser("track", parents=[common], help="cylinder tracking")
    t.add_argument("--steps", type=int, default=None)
    t.add_argument("--runs", type=int, default=None)
    t.add_argument("--schemes", type=_str_list, default=None)
    t.add_argument("--full-scale", action="store_true", help="500 steps, 100 runs and the full scheme table")
    t.add_argument("--no-baseline", action="store_true", help="skip the pure-prediction baseline")
    t.add_argument("--timing-output", default=None, help="CSV of per-run update wall time")
    return parser


def _optimizer_config(args) -> OptimizerConfig:
    return OptimizerConfig(seed=args.seed, quad_nodes=args.quad_nodes, b_max=args.b_max,
                           max_iterations=args.max_iterations)


def _cmd_generate(args) -> int:
    cfg = _optimizer_config(args)
    key = cache.CacheKey(args.dim, args.samples)
    sset, report = obtain(args.dim, args.samples, cfg, args.cache_dir, args.force_recompute, not args.no_compute)
    value = distance.distance(sset, cfg.distance_config(args.dim)).total
    if report is None:
        detail = "cached"
    else:
        detail = f"iterations={report.iterations} converged={report.converged}"
    print(f"{cache.path_for(key, args.cache_dir)} N={sset.dim} M={sset.total_samples} "
          f"distance={value:.17g} {detail}")
    return EXIT_OK


def _cmd_cache(args) -> int:
    if args.action == "purge":
        print(f"removed {cache.purge(args.cache_dir)} file(s)")
        return EXIT_OK
    bad = 0
    for path in cache.entries(args.cache_dir):
        if args.action == "list":
            print(path.name)
            continue
        try:
            sset = cache.validate(path)
            print(f"ok {path.name} N={sset.dim} M={sset.total_samples}")
        except CacheIntegrityError as exc:
            print(f"corrupt {exc}")
            bad += 1
    return EXIT_CACHE if bad else EXIT_OK


def _report_evaluations(before: int) -> None:
    print(f"distance evaluations: {distance.evaluation_count() - before}", file=sys.stderr)


def _cmd_moments(args) -> int:
    before = distance.evaluation_count()
    recs = experiments.run_moment_study(args.dims, args.orders, args.schemes, args.runs, args.seed,
                                        _optimizer_config(args), args.cache_dir, args.force_recompute,
                                        not args.no_compute, args.budget)
    experiments.write_csv(recs, args.output)
    _report_evaluations(before)
    return EXIT_OK


def _cmd_symmetric(args) -> int:
    before = distance.evaluation_count()
    res = experiments.run_symmetric_scenario(args.runs, args.seed, _optimizer_config(args), args.cache_dir,
                                             args.force_recompute, not args.no_compute)
    experiments.write_csv(res, args.output)
    _report_evaluations(before)
    return EXIT_OK


def _cmd_track(args) -> int:
    if args.full_scale:
        traj, runs, schemes = TrajectoryConfig(steps=500), 100, experiments.FULL_SCHEMES
    else:
        traj, runs, schemes = TrajectoryConfig(), 5, experiments.DESK_SCHEMES
    if args.steps is not None:
        traj = replace(traj, steps=args.steps)
    runs = args.runs if args.runs is not None else runs
    schemes = args.schemes if args.schemes is not None else schemes
    before = distance.evaluation_count()
    res = experiments.run_cylinder_tracking(traj, runs, schemes, args.seed, _optimizer_config(args),
                                            args.cache_dir, args.force_recompute, not args.no_compute,
                                            include_baseline=not args.no_baseline)
    experiments.write_csv(res.rows, args.output)
    if args.timing_output:
        experiments.write_csv(res.timings, args.timing_output)
    for t in res.timings:
        if t.diverged_at >= 0:
            print(f"{t.scheme} run {t.run} diverged at step {t.diverged_at}", file=sys.stderr)
    _report_evaluations(before)
    return EXIT_OK


COMMANDS = {
    "generate": _cmd_generate,
    "cache": _cmd_cache,
    "moments": _cmd_moments,
    "symmetric": _cmd_symmetric,
    "track": _cmd_track,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except CacheIntegrityError as exc:
        print(f"cache integrity error: {exc}", file=sys.stderr)
        return EXIT_CACHE
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
