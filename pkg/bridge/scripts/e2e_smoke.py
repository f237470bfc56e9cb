#!/usr/bin/env python3
"""Full pipeline run: two images -> features -> N diverse swaps -> inverted
images -> pixel diversity report, plus a sigma sweep.

At --size 512 --num 20 --iters 200 this reproduces the reference operating
point end to end (budget hours on a laptop CPU); smaller sizes give the
same qualitative picture in minutes.  Swaps run through the `divswap` CLI,
so the engine must be installed alongside this package.
"""

import argparse
import subprocess
import time
from pathlib import Path

import numpy as np
import torch

from vgg_bridge import ExtractionSpec, extract_to_dsfm, invert_features, load_backbone
from vgg_bridge.dsfm import read_dsfm
from vgg_bridge.extract import load_image01
from vgg_bridge.invert import to_uint8


def mean_pixel_distance(images01):
    n = len(images01)
    dists = [
        float(np.abs(images01[i] - images01[j]).mean())
        for i in range(n)
        for j in range(i + 1, n)
    ]
    return float(np.mean(dists))


def median_patch_norm(values, k=3):
    c, _, _ = values.shape
    windows = np.lib.stride_tricks.sliding_window_view(values, (k, k), axis=(1, 2))
    rows = windows.transpose(1, 2, 0, 3, 4).reshape(-1, c * k * k)
    return float(np.median(np.linalg.norm(rows, axis=1)))


def swap(content, style, out_prefix, *flags):
    subprocess.run(
        ["divswap", "run", str(content), str(style), "--out", str(out_prefix), *flags],
        check=True,
        capture_output=True,
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("content_image")
    parser.add_argument("style_image")
    parser.add_argument("--out", default="e2e_out")
    parser.add_argument("--size", type=int, default=256)
    parser.add_argument("--num", type=int, default=20)
    parser.add_argument("--iters", type=int, default=100)
    parser.add_argument("--seed", type=int, default=3)
    parser.add_argument("--weights", default=None, help="VGG19 state-dict path")
    parser.add_argument("--save-images", action="store_true")
    args = parser.parse_args()

    torch.set_num_threads(torch.get_num_threads())
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    spec = ExtractionSpec(image_size=args.size)
    backbone = load_backbone(spec, args.weights)
    print(f"backbone: {backbone.source}  sha256={backbone.sha256[:16]}...")

    started = time.perf_counter()
    for name, img in (("content", args.content_image), ("style", args.style_image)):
        extract_to_dsfm(img, out / f"{name}.dsfm", spec, backbone=backbone)
    print(f"extracted both maps in {time.perf_counter() - started:.1f}s")

    init01 = load_image01(args.content_image, args.size)

    def invert_series(prefix, count):
        images = []
        for i in range(count):
            target = read_dsfm(out / f"{prefix}_{i:03d}.dsfm")
            img01, err = invert_features(target, init01, backbone, iters=args.iters)
            images.append(img01)
            if args.save_images:
                from PIL import Image

                Image.fromarray(to_uint8(img01)).save(out / f"{prefix}_{i:03d}.png")
            print(f"  inverted {prefix}_{i:03d}  rel_feature_err={err:.3f}")
        return images

    swap(
        out / "content.dsfm", out / "style.dsfm", out / "main",
        "--preset", "style-swap", "--num", str(args.num), "--seed", str(args.seed),
    )
    images = invert_series("main", args.num)
    print(f"D_pixel over {args.num} outputs: {mean_pixel_distance(images):.4f}")

    nu = median_patch_norm(read_dsfm(out / "style.dsfm"))
    print(f"sigma sweep (median style patch norm {nu:.1f}):")
    for mult in (0.05, 0.5, 5.0, 50.0):
        sigma = mult * nu
        swap(
            out / "content.dsfm", out / "style.dsfm", out / f"sweep{mult:g}",
            "--sigma-max", str(sigma), "--num", str(max(3, args.num // 5)),
            "--seed", str(args.seed + 1),
        )
        sweep_images = invert_series(f"sweep{mult:g}", max(3, args.num // 5))
        print(f"  sigma={sigma:.1f}: D_pixel {mean_pixel_distance(sweep_images):.4f}")

    print(f"total {time.perf_counter() - started:.0f}s")


if __name__ == "__main__":
    main()
