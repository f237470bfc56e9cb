"""Perceptual distance between two images.

Uses the released `lpips` package when importable.  Otherwise falls back
to an unweighted multi-layer VGG distance (unit-normalized channels, mean
squared differences averaged over the relu*_1 slices) and says so in the
reported version string, since scores from the two are not interchangeable.
"""

from __future__ import annotations

import numpy as np
import torch

from .backbone import ExtractionSpec, forward_features, load_backbone
from .extract import load_image01, to_batch

_FALLBACK_LAYERS = ("relu1_1", "relu2_1", "relu3_1", "relu4_1", "relu5_1")


def _lpips_real(a01: np.ndarray, b01: np.ndarray) -> tuple[float, str]:
    import lpips  # noqa: F401  (optional dependency)

    net = lpips.LPIPS(net="alex", verbose=False)
    def prep(x):
        return torch.from_numpy(x).permute(2, 0, 1).unsqueeze(0) * 2.0 - 1.0

    with torch.no_grad():
        score = float(net(prep(a01), prep(b01)).item())
    return score, f"lpips-{lpips.__version__}-alex"


def _lpips_fallback(
    a01: np.ndarray, b01: np.ndarray, weights_path: str | None
) -> tuple[float, str]:
    size = a01.shape[0]
    spec = ExtractionSpec(layer="relu5_1", image_size=size)
    backbone = load_backbone(spec, weights_path)
    slice_ends = {name: idx for name, idx in _layer_slices(backbone)}

    with torch.no_grad():
        feats_a = _layer_outputs(backbone, to_batch(a01), slice_ends)
        feats_b = _layer_outputs(backbone, to_batch(b01), slice_ends)
    total = 0.0
    for name in _FALLBACK_LAYERS:
        fa, fb = feats_a[name], feats_b[name]
        fa = fa / fa.pow(2).sum(dim=1, keepdim=True).sqrt().clamp_min(1e-10)
        fb = fb / fb.pow(2).sum(dim=1, keepdim=True).sqrt().clamp_min(1e-10)
        total += float((fa - fb).pow(2).sum(dim=1).mean())
    score = total / len(_FALLBACK_LAYERS)
    return score, f"fallback-vgg19-uniform({backbone.source})"


def _layer_slices(backbone):
    from .backbone import LAYER_SLICES

    return [(name, LAYER_SLICES[name]) for name in _FALLBACK_LAYERS]


def _layer_outputs(backbone, pixels01, slice_ends):
    from .backbone import normalize_pixels

    outputs = {}
    x = normalize_pixels(pixels01, backbone.spec)
    wanted = {idx: name for name, idx in slice_ends.items()}
    for i, module in enumerate(backbone.module):
        x = module(x)
        if i + 1 in wanted:
            outputs[wanted[i + 1]] = x
    return outputs


def lpips_distance(
    a_path, b_path, weights_path: str | None = None
) -> tuple[float, str]:
    """Perceptual distance plus the identifier of the scorer that produced it."""
    a01 = load_image01(a_path)
    b01 = load_image01(b_path)
    if a01.shape != b01.shape:
        raise ValueError(f"image sizes differ: {a01.shape} vs {b01.shape}")
    try:
        return _lpips_real(a01, b01)
    except ImportError:
        return _lpips_fallback(a01, b01, weights_path)
