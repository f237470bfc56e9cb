"""Image -> activation map -> .dsfm, with a provenance sidecar."""

from __future__ import annotations

import json
import os

import numpy as np
import torch
from PIL import Image

from .backbone import Backbone, ExtractionSpec, forward_features, load_backbone
from .dsfm import write_dsfm


def load_image01(path, size: int | tuple[int, int] | None = None) -> np.ndarray:
    """RGB image as (H, W, 3) float32 in [0, 1].

    `size` resizes: an int means square, an (H, W) pair is exact.
    """
    with Image.open(path) as img:
        img = img.convert("RGB")
        if isinstance(size, int):
            img = img.resize((size, size), Image.BILINEAR)
        elif size is not None:
            height, width = size
            img = img.resize((width, height), Image.BILINEAR)
        return np.asarray(img, dtype=np.float32) / 255.0


def to_batch(pixels01: np.ndarray) -> torch.Tensor:
    return torch.from_numpy(pixels01).permute(2, 0, 1).unsqueeze(0)


def extract_features(
    image_path,
    spec: ExtractionSpec | None = None,
    backbone: Backbone | None = None,
    weights_path: str | None = None,
) -> tuple[np.ndarray, Backbone]:
    """Post-ReLU activations of `image_path` at the spec's layer.

    Returns a (C, H', W') float32 array (non-negative by construction) and
    the backbone used, so callers can reuse it or log its provenance.
    """
    spec = spec or ExtractionSpec()
    if backbone is None:
        backbone = load_backbone(spec, weights_path)
    pixels = load_image01(image_path, spec.image_size)
    with torch.no_grad():
        feats = forward_features(backbone, to_batch(pixels))
    values = feats.squeeze(0).numpy().astype(np.float32)
    return values, backbone


def extract_to_dsfm(
    image_path,
    out_path,
    spec: ExtractionSpec | None = None,
    backbone: Backbone | None = None,
    weights_path: str | None = None,
) -> Backbone:
    """Extract and persist, writing `<out>.meta.json` beside the map."""
    spec = spec or ExtractionSpec()
    values, backbone = extract_features(image_path, spec, backbone, weights_path)
    write_dsfm(out_path, values)
    sidecar = {
        "source_image": os.path.abspath(os.fspath(image_path)),
        "layer": backbone.layer,
        "image_size": spec.image_size,
        "weights_source": backbone.source,
        "weights_sha256": backbone.sha256,
        "shape": list(values.shape),
    }
    with open(f"{os.fspath(out_path)}.meta.json", "w") as fh:
        json.dump(sidecar, fh, indent=2)
        fh.write("\n")
    return backbone
