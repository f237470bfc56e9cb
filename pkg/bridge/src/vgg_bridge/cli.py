"""Bridge commands: extract features, invert features, score image pairs.

Exit codes: 0 success, 1 usage error, 2 file/format error, 3 shape mismatch.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np
from PIL import Image

from .backbone import LAYER_FACTORS, ExtractionSpec, load_backbone
from .dsfm import DsfmError, read_dsfm
from .extract import extract_to_dsfm, load_image01
from .invert import ShapeMismatch, invert_features, to_uint8
from .perceptual import lpips_distance


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(message)


class _Usage(Exception):
    pass


def cmd_extract(args) -> int:
    spec = ExtractionSpec(layer=args.layer, image_size=args.size)
    backbone = extract_to_dsfm(args.image, args.out, spec, weights_path=args.weights)
    print(f"wrote {args.out}  layer={backbone.layer} weights={backbone.source}")
    print(f"weights_sha256={backbone.sha256}")
    return 0


def cmd_invert(args) -> int:
    target = read_dsfm(args.features)
    # the features fix the working resolution; resize the init to match
    factor = LAYER_FACTORS[args.layer]
    work_hw = (target.shape[1] * factor, target.shape[2] * factor)
    init01 = load_image01(args.init, work_hw)
    spec = ExtractionSpec(layer=args.layer, image_size=max(32, min(work_hw)))
    backbone = load_backbone(spec, args.weights)
    out01, rel_err = invert_features(
        target, init01, backbone, iters=args.iters, lr=args.lr
    )
    Image.fromarray(to_uint8(out01), mode="RGB").save(args.out)
    print(f"wrote {args.out}  iters={args.iters} relative_feature_error={rel_err:.4f}")
    return 0


def cmd_lpips(args) -> int:
    score, version = lpips_distance(args.image_a, args.image_b, args.weights)
    print(f"{score:.6f}  scorer={version}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vgg-bridge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ext = sub.add_parser("extract", help="image -> .dsfm activation map")
    ext.add_argument("image")
    ext.add_argument("--layer", default="relu4_1")
    ext.add_argument("--size", type=int, default=512)
    ext.add_argument("-o", "--out", required=True)
    ext.add_argument("--weights", default=None, help="path to a VGG19 state dict")
    ext.set_defaults(func=cmd_extract)

    inv = sub.add_parser("invert", help=".dsfm -> image by optimization")
    inv.add_argument("features")
    inv.add_argument("--init", required=True, help="initialization image")
    inv.add_argument("--iters", type=int, default=200)
    inv.add_argument("--lr", type=float, default=0.05)
    inv.add_argument("--layer", default="relu4_1")
    inv.add_argument("-o", "--out", required=True)
    inv.add_argument("--weights", default=None)
    inv.set_defaults(func=cmd_invert)

    lp = sub.add_parser("lpips", help="perceptual distance between two images")
    lp.add_argument("image_a")
    lp.add_argument("image_b")
    lp.add_argument("--weights", default=None)
    lp.set_defaults(func=cmd_lpips)

    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except _Usage as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        if isinstance(exc, ShapeMismatch):
            print(f"error: {exc}", file=sys.stderr)
            return 3
        print(f"error: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, DsfmError) else 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
