#!/usr/bin/env python3
"""Time the swap pipeline and the cost of the sigma shift at several sizes.

Reports, per configuration, the baseline swap time (sigma off), the
diversified swap time, and the relative overhead of diversification.
"""

import argparse
import time

import numpy as np

from divswap import FeatureMap, SwapConfig, div_swap, extract_patches


def timed(content, style, config, reps):
    best = float("inf")
    for _ in range(reps):
        start = time.perf_counter()
        div_swap(content, style, config)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--reps", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    cases = [
        (64, 20, 20),
        (128, 34, 34),
        (256, 52, 52),  # 2500 patches of dim 2304
    ]
    print(f"{'CxHxW':>14} {'patches':>8} {'dim':>6} {'base':>8} {'shifted':>8} {'overhead':>9}")
    for c, h, w in cases:
        content = FeatureMap(np.maximum(rng.standard_normal((c, h, w)), 0).astype(np.float32))
        style = FeatureMap(np.maximum(rng.standard_normal((c, h, w)), 0).astype(np.float32))
        grid = extract_patches(content, 3, 1)
        t_base = timed(content, style, SwapConfig(distribution="none"), args.reps)
        t_div = timed(content, style, SwapConfig(sigma_max=1e3, seed=1), args.reps)
        print(
            f"{f'{c}x{h}x{w}':>14} {grid.n_patches:>8} {grid.dim:>6} "
            f"{t_base:>7.3f}s {t_div:>7.3f}s {(t_div - t_base) / t_div:>+8.1%}"
        )


if __name__ == "__main__":
    main()
