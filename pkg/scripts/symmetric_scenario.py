#!/usr/bin/env python3
"""Distance measurement of a state whose prior is centred at the origin:
symmetric sets return the prior, an asymmetric set does not."""
import argparse

from lcdsym.experiments import run_symmetric_scenario, write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--runs", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("-o", "--output", default=None)
    args = ap.parse_args()
    res = run_symmetric_scenario(args.runs, args.seed)
    if args.output:
        write_csv(res, args.output)
    for r in res:
        print(f"{r.estimator:>22} ({r.samples:2d} samples)  mean RMSE {r.mean_rmse:.3e}  "
              f"cov RMSE {r.cov_rmse:.3e}  max |Cxy| {r.max_cross_cov:.3e}")


if __name__ == "__main__":
    main()
