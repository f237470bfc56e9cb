#!/usr/bin/env python3
"""Generate a synthetic content/style .dsfm pair for experiments.

Maps are ReLU-rectified Gaussian noise, optionally box-smoothed a few times
so patches carry local structure instead of pure speckle.
"""

import argparse

import numpy as np

from divswap import FeatureMap, save_feature_map


def smooth(values, passes):
    for _ in range(passes):
        padded = np.pad(values, ((0, 0), (1, 1), (1, 1)), mode="edge")
        values = (
            padded[:, :-2, 1:-1]
            + padded[:, 2:, 1:-1]
            + padded[:, 1:-1, :-2]
            + padded[:, 1:-1, 2:]
            + padded[:, 1:-1, 1:-1]
        ) / 5.0
    return values


def synth_map(rng, channels, height, width, passes):
    values = rng.standard_normal((channels, height, width))
    values = smooth(values, passes)
    return FeatureMap(np.maximum(values, 0.0).astype(np.float32))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("content_out")
    parser.add_argument("style_out")
    parser.add_argument("--channels", type=int, default=16)
    parser.add_argument("--height", type=int, default=32)
    parser.add_argument("--width", type=int, default=32)
    parser.add_argument("--smooth-passes", type=int, default=2)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    for path in (args.content_out, args.style_out):
        fmap = synth_map(rng, args.channels, args.height, args.width, args.smooth_passes)
        save_feature_map(fmap, path)
        print(f"wrote {path} ({fmap.channels}x{fmap.height}x{fmap.width})")


if __name__ == "__main__":
    main()
