"""Command-line surface: swaps, sigma sweeps, metrics, heat maps, match tables.

Exit codes: 0 success, 1 usage error, 2 file-format/validation error,
3 dimension/consistency error.  Every command is deterministic given its
flags; the seed defaults to 0 (or DIVSWAP_SEED when set) rather than
anything time-based, so reruns are reproducible by default.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import divswapper, metrics, patch_ops
from .divswapper import PRESETS, SwapConfig, baseline_config, div_swap, flip_audit
from .exceptions import (
    ArgumentError,
    ConsistencyError,
    DimensionError,
    DivSwapError,
    FormatError,
    UsageError,
    ValidationError,
)
from .feature_tensor import load_feature_map, save_feature_map, write_bytes_atomic

SEED_ENV_VAR = "DIVSWAP_SEED"


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; route through UsageError
    # instead so the documented exit-code table holds.
    def error(self, message):
        raise UsageError(message)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--patch-size", type=int, default=3)
    parser.add_argument("--stride", type=int, default=1)
    parser.add_argument("--sigma-max", type=float, default=None)
    parser.add_argument(
        "--dist", choices=list(divswapper.DISTRIBUTIONS), default="uniform"
    )
    parser.add_argument("--preset", choices=sorted(PRESETS), default=None)
    parser.add_argument("--seed", type=int, default=None)


def _resolve_seed(flag_value: int | None) -> int:
    if flag_value is not None:
        return flag_value
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV_VAR} must be an integer, got {env!r}")
    return 0


def _resolve_config(args) -> SwapConfig:
    if args.preset is not None and args.sigma_max is not None:
        raise UsageError("--preset and --sigma-max are mutually exclusive")
    seed = _resolve_seed(args.seed)
    common = dict(
        patch_size=args.patch_size, stride=args.stride, seed=seed
    )
    try:
        if args.dist == "none":
            return SwapConfig(distribution="none", sigma_max=0.0, **common)
        if args.preset is not None:
            return SwapConfig(
                distribution=args.dist, sigma_max=PRESETS[args.preset], **common
            )
        if args.sigma_max is None:
            raise UsageError(
                f"--dist {args.dist} needs --sigma-max or --preset (or use --dist none)"
            )
        return SwapConfig(distribution=args.dist, sigma_max=args.sigma_max, **common)
    except ArgumentError as exc:
        raise UsageError(str(exc))


def _output_prefix(out: str) -> Path:
    """Interpret --out as a directory (trailing separator or existing dir)
    or as a path prefix; parent directories are created either way."""
    path = Path(out)
    if out.endswith(os.sep) or path.is_dir():
        path.mkdir(parents=True, exist_ok=True)
        return path / "swap"
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _swap_one(content, style, config, index):
    return div_swap(content, style, config, output_index=index)


def cmd_run(args) -> int:
    if args.num < 1:
        raise UsageError(f"--num must be >= 1, got {args.num}")
    if args.workers < 1:
        raise UsageError(f"--workers must be >= 1, got {args.workers}")
    config = _resolve_config(args)
    content = load_feature_map(args.content)
    style = load_feature_map(args.style)
    prefix = _output_prefix(args.out)

    baseline_match = None
    if args.audit:
        _, baseline_match, _ = div_swap(content, style, baseline_config(config))
        content_grid = patch_ops.extract_patches(
            content, config.patch_size, config.stride
        )
        style_grid = patch_ops.extract_patches(style, config.patch_size, config.stride)

    indices = range(args.num)
    if args.workers == 1:
        results = [_swap_one(content, style, config, i) for i in indices]
    else:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            results = list(
                pool.map(lambda i: _swap_one(content, style, config, i), indices)
            )

    for i, (swapped, match, sigmas) in zip(indices, results):
        out_path = Path(f"{prefix}_{i:03d}.dsfm")
        save_feature_map(swapped, out_path)
        line = f"wrote {out_path}"
        if args.audit:
            report = flip_audit(content_grid, style_grid, baseline_match, match, sigmas)
            audit_path = Path(f"{prefix}_{i:03d}.audit.json")
            payload = {
                "n_flipped": report.n_flipped,
                "inequality_violations": report.inequality_violations,
                "higher_norm_fraction": report.higher_norm_fraction,
                "seed": config.seed,
                "sigma_max": config.sigma_max,
            }
            write_bytes_atomic(audit_path, (json.dumps(payload) + "\n").encode())
            line += (
                f"  n_flipped={report.n_flipped}"
                f" violations={report.inequality_violations}"
                f" higher_norm_fraction={report.higher_norm_fraction:.4f}"
            )
        print(line)
    return 0


def cmd_sweep(args) -> int:
    try:
        grid = [float(v) for v in args.sigma_grid.split(",") if v]
    except ValueError:
        raise UsageError(f"--sigma-grid must be comma-separated numbers: {args.sigma_grid!r}")
    if not grid:
        raise UsageError("--sigma-grid is empty")
    if any(v <= 0 for v in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise UsageError("--sigma-grid values must be positive and strictly increasing")
    if args.num < 1:
        raise UsageError(f"--num must be >= 1, got {args.num}")
    if args.dist == "none":
        raise UsageError("--dist none has no sigma to sweep")

    content = load_feature_map(args.content)
    style = load_feature_map(args.style)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = _resolve_seed(args.seed)

    rows = ["sigma_max,mean_feature_distance"]
    for sigma_max in grid:
        config = SwapConfig(
            patch_size=args.patch_size,
            stride=args.stride,
            sigma_max=sigma_max,
            distribution=args.dist,
            seed=seed,
        )
        point_dir = out_dir / f"sigma_{sigma_max:g}"
        point_dir.mkdir(exist_ok=True)
        outputs = []
        for i in range(args.num):
            swapped, _, _ = div_swap(content, style, config, output_index=i)
            save_feature_map(swapped, point_dir / f"swap_{i:03d}.dsfm")
            outputs.append(swapped)
        mean = metrics.pairwise_report(outputs, "feature").mean_distance
        rows.append(f"{sigma_max:g},{mean:.9g}")
        print(rows[-1])
    csv_path = out_dir / "sweep.csv"
    write_bytes_atomic(csv_path, ("\n".join(rows) + "\n").encode("ascii"))
    print(f"wrote {csv_path}")
    return 0


def _collect_inputs(paths: list[str], kind: str) -> list[Path]:
    suffix = ".png" if kind == "pixel" else ".dsfm"
    if len(paths) == 1 and Path(paths[0]).is_dir():
        found = sorted(Path(paths[0]).glob(f"*{suffix}"))
        if not found:
            raise UsageError(f"no {suffix} files under {paths[0]}")
        return found
    return [Path(p) for p in paths]


def cmd_metrics(args) -> int:
    files = _collect_inputs(args.inputs, args.kind)
    if len(files) < 2:
        raise UsageError(f"metrics needs at least 2 inputs, got {len(files)}")
    if args.kind == "pixel":
        items = [metrics.load_png(p) for p in files]
    else:
        items = [load_feature_map(p) for p in files]
    report = metrics.pairwise_report(items, args.kind)
    print(report.to_json() if args.json else report.to_text())
    return 0


def _parse_size(spec: str) -> tuple[int, int]:
    try:
        w, h = spec.lower().split("x")
        width, height = int(w), int(h)
    except ValueError:
        raise UsageError(f"--size must look like WxH, got {spec!r}")
    if width < 1 or height < 1:
        raise UsageError(f"--size dimensions must be >= 1, got {spec!r}")
    return width, height


def cmd_heatmap(args) -> int:
    fmap = load_feature_map(args.input)
    if args.size is None:
        width, height = fmap.width, fmap.height
    else:
        width, height = _parse_size(args.size)
    image = metrics.heatmap_png(fmap, width, height)
    Path(args.output).parent.mkdir(parents=True, exist_ok=True)
    metrics.save_png(image, args.output)
    print(f"wrote {args.output}")
    return 0


def cmd_match_table(args) -> int:
    config = _resolve_config(args)
    content = load_feature_map(args.content)
    style = load_feature_map(args.style)
    content_grid = patch_ops.extract_patches(content, config.patch_size, config.stride)
    style_grid = patch_ops.extract_patches(style, config.patch_size, config.stride)
    sigmas = divswapper.sample_sigmas(style_grid.n_patches, config)
    normalized = divswapper.shifted_normalize(style_grid, sigmas, config.epsilon)
    match = patch_ops.ncc_match(content_grid, normalized)
    Path(args.output).parent.mkdir(parents=True, exist_ok=True)
    patch_ops.write_match_csv(match, args.output)
    print(f"wrote {args.output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="divswap", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="generate swapped maps")
    run.add_argument("content")
    run.add_argument("style")
    _add_config_flags(run)
    run.add_argument("--num", type=int, default=1)
    run.add_argument("--out", required=True, help="output path prefix or directory")
    run.add_argument("--audit", action="store_true")
    run.add_argument("--workers", type=int, default=1)
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser(
        "sweep", help="diversity across sigma ranges"
    )
    sweep.add_argument("content")
    sweep.add_argument("style")
    _add_config_flags(sweep)
    sweep.add_argument("--sigma-grid", required=True)
    sweep.add_argument("--num", type=int, default=20)
    sweep.add_argument("--out", required=True, help="output directory")
    sweep.set_defaults(func=cmd_sweep)

    met = sub.add_parser(
        "metrics", help="pairwise diversity report"
    )
    met.add_argument("inputs", nargs="+", help="files, or a single directory")
    met.add_argument("--kind", choices=list(metrics.REPORT_KINDS), required=True)
    met.add_argument("--json", action="store_true")
    met.set_defaults(func=cmd_metrics)

    heat = sub.add_parser(
        "heatmap", help="render a channel-magnitude heat map"
    )
    heat.add_argument("input")
    heat.add_argument("output")
    heat.add_argument("--size", default=None, help="WxH, defaults to source dims")
    heat.set_defaults(func=cmd_heatmap)

    table = sub.add_parser(
        "match-table", help="dump per-patch match CSV"
    )
    table.add_argument("content")
    table.add_argument("style")
    _add_config_flags(table)
    table.add_argument("output")
    table.set_defaults(func=cmd_match_table)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (UsageError, ArgumentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (FormatError, ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DimensionError, ConsistencyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except DivSwapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
