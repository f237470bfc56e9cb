"""VGG19 feature slices with explicit weight provenance.

Weights resolve in priority order: an explicit file path, the
VGG_BRIDGE_WEIGHTS environment variable, the torchvision download, and
finally a fixed-seed random initialization for offline environments.  The
checksum of whatever was loaded is reported alongside every extraction so
results are attributable to an exact backbone.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field

import torch
from torch import nn
from torchvision.models import vgg19

WEIGHTS_ENV_VAR = "VGG_BRIDGE_WEIGHTS"

# features-module slice ends (exclusive) per named activation
LAYER_SLICES = {
    "relu1_1": 2,
    "relu2_1": 7,
    "relu3_1": 12,
    "relu4_1": 21,
    "relu5_1": 30,
}

# spatial reduction factor at each named activation
LAYER_FACTORS = {
    "relu1_1": 1,
    "relu2_1": 2,
    "relu3_1": 4,
    "relu4_1": 8,
    "relu5_1": 16,
}

IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)

_FALLBACK_SEED = 0x5EED


@dataclass(frozen=True)
class ExtractionSpec:
    """What to extract: layer, working image size, input normalization."""

    layer: str = "relu4_1"
    image_size: int = 512
    mean: tuple[float, float, float] = IMAGENET_MEAN
    std: tuple[float, float, float] = IMAGENET_STD

    def __post_init__(self):
        if self.layer not in LAYER_SLICES:
            raise ValueError(
                f"unknown layer {self.layer!r}, expected one of {sorted(LAYER_SLICES)}"
            )
        if self.image_size < 32:
            raise ValueError(f"image_size must be >= 32, got {self.image_size}")


@dataclass
class Backbone:
    module: nn.Module
    layer: str
    source: str
    sha256: str
    spec: ExtractionSpec = field(default_factory=ExtractionSpec)


def _seeded_init(model: nn.Module) -> None:
    gen = torch.Generator().manual_seed(_FALLBACK_SEED)
    for mod in model.modules():
        if isinstance(mod, nn.Conv2d):
            fan_in = mod.in_channels * mod.kernel_size[0] * mod.kernel_size[1]
            std = (2.0 / fan_in) ** 0.5
            with torch.no_grad():
                mod.weight.copy_(
                    torch.randn(mod.weight.shape, generator=gen) * std
                )
                mod.bias.copy_(torch.rand(mod.bias.shape, generator=gen) * 0.1)


def _state_checksum(module: nn.Module) -> str:
    digest = hashlib.sha256()
    for key, tensor in sorted(module.state_dict().items()):
        digest.update(key.encode())
        digest.update(tensor.contiguous().numpy().tobytes())
    return digest.hexdigest()


def load_backbone(spec: ExtractionSpec, weights_path: str | None = None) -> Backbone:
    """Build the feature slice for `spec.layer` and resolve its weights."""
    model = vgg19(weights=None)
    path = weights_path or os.environ.get(WEIGHTS_ENV_VAR)
    if path:
        state = torch.load(path, map_location="cpu", weights_only=True)
        feature_keys = {k for k in state if k.startswith("features.")}
        if not feature_keys:
            raise ValueError(f"{path}: no features.* keys in state dict")
        missing, _ = model.load_state_dict(state, strict=False)
        missing_features = [k for k in missing if k.startswith("features.")]
        if missing_features:
            raise ValueError(f"{path}: missing keys {missing_features[:4]}...")
        source = f"file:{os.path.abspath(path)}"
    else:
        try:
            from torchvision.models import VGG19_Weights

            model = vgg19(weights=VGG19_Weights.IMAGENET1K_V1)
            source = "torchvision:vgg19-IMAGENET1K_V1"
        except Exception:
            # offline fallback: deterministic random weights, clearly labeled
            _seeded_init(model.features)
            source = f"seeded-random:he-uniform-bias-seed{_FALLBACK_SEED:#x}"
    module = model.features[: LAYER_SLICES[spec.layer]].eval()
    for param in module.parameters():
        param.requires_grad_(False)
    return Backbone(
        module=module,
        layer=spec.layer,
        source=source,
        sha256=_state_checksum(module),
        spec=spec,
    )


def normalize_pixels(pixels: torch.Tensor, spec: ExtractionSpec) -> torch.Tensor:
    """Map (1, 3, H, W) pixels in [0, 1] to the backbone's input statistics."""
    mean = torch.tensor(spec.mean).view(1, 3, 1, 1)
    std = torch.tensor(spec.std).view(1, 3, 1, 1)
    return (pixels - mean) / std


def forward_features(backbone: Backbone, pixels01: torch.Tensor) -> torch.Tensor:
    """(1, 3, H, W) pixels in [0, 1] -> (1, C, H', W') activations."""
    return backbone.module(normalize_pixels(pixels01, backbone.spec))
