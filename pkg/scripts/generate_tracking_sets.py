#!/usr/bin/env python3
"""Pre-compute the 92-dimensional sample sets used by the tracking update
(461 and, optionally, 1841 samples) into the sample cache."""
import argparse
import time

from lcdsym.optimizer import OptimizerConfig
from lcdsym.schemes import obtain


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--counts", default="461", help="comma-separated sample counts, e.g. 461,1841")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    for total in (int(c) for c in args.counts.split(",")):
        t0 = time.perf_counter()
        _, rep = obtain(92, total, OptimizerConfig(seed=args.seed))
        took = time.perf_counter() - t0
        print(f"M={total}: " + ("cached" if rep is None else f"{rep.iterations} iterations, D={rep.final_distance:.6g}")
              + f" ({took:.1f} s)")


if __name__ == "__main__":
    main()
