"""Diversity measurement over output sets, plus activation heat maps.

Two distances: mean absolute pixel difference on [0, 1] for rendered
images, and cosine distance on flattened feature maps as the feature-space
stand-in where a learned perceptual metric is unavailable.  Reports
aggregate either one over all unordered pairs of a set.
"""

from __future__ import annotations

import io
import json
import math
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from PIL import Image

from .exceptions import ArgumentError, DimensionError, ValidationError
from .feature_tensor import FeatureMap, channel_l2_map, write_bytes_atomic

REPORT_KINDS = ("pixel", "feature")


@dataclass(frozen=True)
class RgbImage:
    """Immutable 8-bit RGB raster, pixels row-major as an (H, W, 3) array."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValidationError(f"expected an (H, W, 3) array, got {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValidationError("image dimensions must be >= 1")
        if arr.dtype != np.uint8:
            if np.issubdtype(arr.dtype, np.floating) or (
                arr.min() < 0 or arr.max() > 255
            ):
                raise ValidationError("pixel values must be integers in [0, 255]")
        arr = np.array(arr, dtype=np.uint8, order="C", copy=True)
        arr.flags.writeable = False
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


def load_png(path: str | os.PathLike) -> RgbImage:
    with Image.open(path) as img:
        return RgbImage(np.asarray(img.convert("RGB")))


def save_png(image: RgbImage, path: str | os.PathLike) -> None:
    buf = io.BytesIO()
    Image.fromarray(image.pixels, mode="RGB").save(buf, format="PNG")
    write_bytes_atomic(path, buf.getvalue())


def pixel_distance(a: RgbImage, b: RgbImage) -> float:
    """Mean |a - b| / 255 over every channel value; 0 identical, 1 maximal."""
    if a.pixels.shape != b.pixels.shape:
        raise DimensionError(
            f"image dims differ: {a.pixels.shape} vs {b.pixels.shape}"
        )
    diff = np.abs(a.pixels.astype(np.float64) - b.pixels.astype(np.float64))
    return float(diff.mean() / 255.0)


def feature_distance(a: FeatureMap, b: FeatureMap) -> float:
    """1 - cosine similarity of the flattened maps, clamped to [0, 2].

    Both maps all-zero compare as identical (0.0); exactly one all-zero map
    is treated like an orthogonal vector (1.0).
    """
    if a.values.shape != b.values.shape:
        raise DimensionError(
            f"feature dims differ: {a.values.shape} vs {b.values.shape}"
        )
    va = a.values.astype(np.float64).ravel()
    vb = b.values.astype(np.float64).ravel()
    na = np.linalg.norm(va)
    nb = np.linalg.norm(vb)
    if na == 0.0 and nb == 0.0:
        return 0.0
    if na == 0.0 or nb == 0.0:
        return 1.0
    return float(min(2.0, max(0.0, 1.0 - float(va @ vb) / (na * nb))))


@dataclass(frozen=True)
class DiversityReport:
    """Pairwise distance statistics over a set of N outputs."""

    kind: str
    n_outputs: int
    n_pairs: int
    mean_distance: float
    min_distance: float
    max_distance: float
    stddev: float

    def to_json(self) -> str:
        """Single-line JSON with stable key order."""
        return json.dumps(
            {
                "kind": self.kind,
                "n_outputs": self.n_outputs,
                "n_pairs": self.n_pairs,
                "mean": self.mean_distance,
                "min": self.min_distance,
                "max": self.max_distance,
                "stddev": self.stddev,
            }
        )

    def to_text(self) -> str:
        rows = [
            ("kind", self.kind),
            ("n_outputs", str(self.n_outputs)),
            ("n_pairs", str(self.n_pairs)),
            ("mean", f"{self.mean_distance:.9g}"),
            ("min", f"{self.min_distance:.9g}"),
            ("max", f"{self.max_distance:.9g}"),
            ("stddev", f"{self.stddev:.9g}"),
        ]
        return "\n".join(f"{name:<9} : {value}" for name, value in rows)


def pairwise_report(
    items: Sequence[RgbImage] | Sequence[FeatureMap], kind: str
) -> DiversityReport:
    """Distance statistics over all C(N, 2) unordered pairs of `items`."""
    if kind not in REPORT_KINDS:
        raise ArgumentError(f"kind must be one of {REPORT_KINDS}, got {kind!r}")
    n = len(items)
    if n < 2:
        raise ArgumentError(f"need at least 2 items for a pairwise report, got {n}")
    distance = pixel_distance if kind == "pixel" else feature_distance
    values = [
        distance(items[i], items[j]) for i in range(n) for j in range(i + 1, n)
    ]
    mean = math.fsum(values) / len(values)
    var = math.fsum((v - mean) ** 2 for v in values) / len(values)
    return DiversityReport(
        kind=kind,
        n_outputs=n,
        n_pairs=len(values),
        mean_distance=mean,
        min_distance=min(values),
        max_distance=max(values),
        stddev=math.sqrt(var),
    )


def _resize_bilinear(plane: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resampling with endpoint-aligned coordinates.

    Output size equal to input size reproduces the input exactly; a
    singleton output dimension samples the input's center.
    """
    in_h, in_w = plane.shape

    def coords(n_in: int, n_out: int) -> np.ndarray:
        if n_out == 1:
            return np.full(1, (n_in - 1) / 2.0)
        return np.arange(n_out) * ((n_in - 1) / (n_out - 1))

    ys = coords(in_h, out_h)
    xs = coords(in_w, out_w)
    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    y1 = np.minimum(y0 + 1, in_h - 1)
    x1 = np.minimum(x0 + 1, in_w - 1)
    wy = (ys - y0)[:, None]
    wx = (xs - x0)[None, :]
    top = plane[y0][:, x0] * (1 - wx) + plane[y0][:, x1] * wx
    bottom = plane[y1][:, x0] * (1 - wx) + plane[y1][:, x1] * wx
    return top * (1 - wy) + bottom * wy


def heatmap_png(fmap: FeatureMap, out_width: int, out_height: int) -> RgbImage:
    """Channel-magnitude heat map rendered to a grayscale RGB image.

    Per-location channel L2 norms, min-max normalized to [0, 255] (a flat
    map renders black), bilinearly upsampled to the requested size, then
    replicated across the three channels.
    """
    if out_width < 1 or out_height < 1:
        raise ArgumentError("output dimensions must be >= 1")
    mag = channel_l2_map(fmap)
    lo, hi = float(mag.min()), float(mag.max())
    if hi == lo:
        norm = np.zeros_like(mag)
    else:
        norm = (mag - lo) * (255.0 / (hi - lo))
    resized = _resize_bilinear(norm, out_height, out_width)
    gray = np.clip(np.rint(resized), 0, 255).astype(np.uint8)
    return RgbImage(np.repeat(gray[:, :, None], 3, axis=2))
