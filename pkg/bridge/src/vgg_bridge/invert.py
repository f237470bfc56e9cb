"""Feature inversion by direct pixel optimization.

Minimizes the relative squared error between the target activations and
the activations of the optimized image, starting from a caller-supplied
initialization.  No decoder network and no training assets: slower per
image, but fully reproducible.
"""

from __future__ import annotations

import numpy as np
import torch

from .backbone import Backbone, forward_features
from .extract import to_batch


class ShapeMismatch(ValueError):
    """Target features do not fit the init image at the chosen layer."""


def relative_error(produced: torch.Tensor, target: torch.Tensor) -> float:
    return float(
        torch.linalg.vector_norm(produced - target)
        / torch.linalg.vector_norm(target).clamp_min(1e-12)
    )


def invert_features(
    target: np.ndarray,
    init_pixels01: np.ndarray,
    backbone: Backbone,
    iters: int = 200,
    lr: float = 0.05,
) -> tuple[np.ndarray, float]:
    """Optimize pixels whose activations approximate `target`.

    Returns the image as (H, W, 3) float32 in [0, 1] plus the final
    relative feature error.  With iters=0 the init comes back unchanged
    (error still reported against the target).
    """
    target_t = torch.from_numpy(np.ascontiguousarray(target, dtype=np.float32))
    target_t = target_t.unsqueeze(0)
    pixels = to_batch(np.ascontiguousarray(init_pixels01, dtype=np.float32))

    with torch.no_grad():
        produced = forward_features(backbone, pixels)
    if produced.shape != target_t.shape:
        raise ShapeMismatch(
            f"target {tuple(target_t.shape[1:])} vs init-image features "
            f"{tuple(produced.shape[1:])} at layer {backbone.layer}"
        )
    if iters == 0:
        return init_pixels01.copy(), relative_error(produced, target_t)

    pixels = pixels.clone().requires_grad_(True)
    target_energy = target_t.pow(2).sum().clamp_min(1e-12)
    optimizer = torch.optim.Adam([pixels], lr=lr)
    for _ in range(iters):
        optimizer.zero_grad()
        loss = (forward_features(backbone, pixels) - target_t).pow(2).sum() / target_energy
        loss.backward()
        optimizer.step()
        with torch.no_grad():
            pixels.clamp_(0.0, 1.0)

    with torch.no_grad():
        final = forward_features(backbone, pixels)
    out = pixels.detach().squeeze(0).permute(1, 2, 0).numpy().astype(np.float32)
    return out, relative_error(final, target_t)


def to_uint8(pixels01: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(pixels01 * 255.0), 0, 255).astype(np.uint8)
