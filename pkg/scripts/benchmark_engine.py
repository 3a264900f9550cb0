#!/usr/bin/env python3

import os
import sys
import time
import argparse

# Add the parent directory to the path so we can import our modules
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.engine import run_eden_chain, run_fpp
from app.models.run import RunConfig, StopRule
from app.models.weights import WeightSpec


def benchmark(runner, alpha, edges, dimension, seed):
    cfg = RunConfig(dimension=dimension, weight=WeightSpec(alpha=alpha), seed=seed,
                    stop_rule=StopRule(kind="edge_count", edges=edges))
    start = time.perf_counter()
    result = runner(cfg)
    elapsed = time.perf_counter() - start
    return elapsed, result.step_count / elapsed


def main():
    parser = argparse.ArgumentParser(description="Time the growth engines")
    parser.add_argument("--edges", type=int, nargs="*", default=[10_000, 100_000, 1_000_000])
    parser.add_argument("--alphas", type=float, nargs="*", default=[0.0, 0.5, 1.0, 2.0])
    parser.add_argument("--dimension", type=int, default=2)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    print(f"{'sampler':>8} {'alpha':>6} {'edges':>10} {'seconds':>9} {'edges/s':>12}")
    for name, runner in (("fpp", run_fpp), ("eden", run_eden_chain)):
        for alpha in args.alphas:
            for edges in args.edges:
                elapsed, rate = benchmark(runner, alpha, edges, args.dimension, args.seed)
                print(f"{name:>8} {alpha:>6.2f} {edges:>10d} {elapsed:>9.2f} {rate:>12.0f}")


if __name__ == "__main__":
    main()
