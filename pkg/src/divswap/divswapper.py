"""Diversified style swapping via shifted style normalization.

The deterministic baseline swap normalizes each style patch by its L2 norm
and matches on inner products.  Diversification shifts every style patch's
normalizer by a random positive deviation sigma_j, so the matching ranking
is perturbed while reconstruction still uses the untouched style patches:

    normalized_j = patch_j / (||patch_j|| + sigma_j)

Sigmas come from a stateless splitmix64-style hash of (seed, output_index,
patch index), so draws are reproducible per patch no matter how many
workers evaluate them or in what order.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .exceptions import ArgumentError, ConsistencyError, DimensionError
from .feature_tensor import FeatureMap
from .patch_ops import (
    MatchResult,
    PatchGrid,
    extract_patches,
    grid_with_patches,
    ncc_match,
    patch_norms,
    reconstruct,
)

DISTRIBUTIONS = ("uniform", "normal", "none")

# sigma_max presets: upper ends of sampling ranges that pair well with the
# usual swap layers of the named host methods.
PRESETS = {
    "cnnmrf": 1e3,
    "style-swap": 1e5,
    "avatar-net": 5e3,
    "wct": 5e3,
}

_U64 = np.uint64
_INIT = _U64(0x6A09E667F3BCC909)


@dataclass(frozen=True)
class SwapConfig:
    """Everything that determines one swap besides the two feature maps."""

    patch_size: int = 3
    stride: int = 1
    sigma_max: float = 0.0
    distribution: str = "uniform"
    seed: int = 0
    epsilon: float = 1e-9

    def __post_init__(self):
        if self.patch_size < 1:
            raise ArgumentError(f"patch_size must be >= 1, got {self.patch_size}")
        if self.stride < 1:
            raise ArgumentError(f"stride must be >= 1, got {self.stride}")
        if self.distribution not in DISTRIBUTIONS:
            raise ArgumentError(
                f"distribution must be one of {DISTRIBUTIONS}, got {self.distribution!r}"
            )
        if self.distribution != "none" and not self.sigma_max > 0:
            raise ArgumentError(
                f"sigma_max must be > 0 for distribution {self.distribution!r}"
            )
        if not self.epsilon > 0:
            raise ArgumentError("epsilon must be > 0")
        if not 0 <= self.seed < 2**64:
            raise ArgumentError("seed must fit in 64 unsigned bits")


def preset_config(name: str, **overrides) -> SwapConfig:
    """A uniform-distribution SwapConfig at one of the named sigma ranges."""
    if name not in PRESETS:
        raise ArgumentError(f"unknown preset {name!r}, expected one of {sorted(PRESETS)}")
    params = {"sigma_max": PRESETS[name], "distribution": "uniform"}
    params.update(overrides)
    return SwapConfig(**params)


def baseline_config(config: SwapConfig) -> SwapConfig:
    """The sigma=0 counterpart of `config` (same grid geometry and seed)."""
    return replace(config, distribution="none", sigma_max=0.0)


@dataclass(frozen=True)
class SigmaVector:
    """Per-style-patch deviations; strictly positive unless sampling is off."""

    values: np.ndarray  # (n_s,) float64

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        if arr.ndim != 1 or arr.shape[0] < 1:
            raise ArgumentError("sigma vector must be 1-D and non-empty")
        if (arr < 0).any() or not np.isfinite(arr).all():
            raise ArgumentError("sigmas must be finite and >= 0")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.shape[0]


def _mix64(x: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer; bijective on uint64, multiplies wrap mod 2**64.
    with np.errstate(over="ignore"):
        x = (x ^ (x >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
        x = (x ^ (x >> _U64(27))) * _U64(0x94D049BB133111EB)
    return x ^ (x >> _U64(31))


def _hash_unit(seed: int, output_index: int, idx: np.ndarray, salt: int) -> np.ndarray:
    """Uniform [0, 1) floats, a pure function of (seed, output_index, idx, salt)."""
    key = _mix64(_INIT ^ _U64(seed))
    key = _mix64(key ^ _U64(output_index))
    key = _mix64(key ^ _U64(salt))
    bits = _mix64(idx.astype(np.uint64) ^ key)
    return (bits >> _U64(11)).astype(np.float64) * 2.0**-53


def sample_sigmas(
    n_patches: int, config: SwapConfig, output_index: int = 0
) -> SigmaVector:
    """Draw one deviation per style patch.

    uniform: sigma_max * (1 - u) with u in [0, 1), hence values in
    (0, sigma_max].  normal: |z| * sigma_max / 2 with z standard normal via
    Box-Muller, redrawn on an exact zero.  none: all zeros.
    """
    if n_patches < 1:
        raise ArgumentError(f"n_patches must be >= 1, got {n_patches}")
    idx = np.arange(n_patches, dtype=np.uint64)
    if config.distribution == "none":
        return SigmaVector(np.zeros(n_patches))
    if config.distribution == "uniform":
        u = _hash_unit(config.seed, output_index, idx, salt=0)
        return SigmaVector(config.sigma_max * (1.0 - u))
    # normal
    sigmas = np.zeros(n_patches)
    pending = np.arange(n_patches)
    salt = 0
    while pending.size:
        u1 = _hash_unit(config.seed, output_index, idx[pending], salt)
        u2 = _hash_unit(config.seed, output_index, idx[pending], salt + 1)
        z = np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * np.pi * u2)
        sigmas[pending] = np.abs(z) * (config.sigma_max / 2.0)
        pending = pending[sigmas[pending] == 0.0]
        salt += 2
    return SigmaVector(sigmas)


def shifted_normalize(
    style: PatchGrid, sigmas: SigmaVector, epsilon: float = 1e-9
) -> PatchGrid:
    """Divide style row j by (||row j|| + sigma_j), epsilon-guarded at sigma=0.

    The guard only matters in baseline mode, where a dead (all-zero) patch
    would otherwise divide by zero; a positive sigma already makes the
    denominator positive on its own.
    """
    if len(sigmas) != style.n_patches:
        raise DimensionError(
            f"{len(sigmas)} sigmas for {style.n_patches} style patches"
        )
    if not epsilon > 0:
        raise ArgumentError("epsilon must be > 0")
    denom = patch_norms(style) + sigmas.values
    denom = denom + np.where(sigmas.values == 0.0, epsilon, 0.0)
    return grid_with_patches(style, style.patches / denom[:, None])


def div_swap(
    content: FeatureMap,
    style: FeatureMap,
    config: SwapConfig,
    output_index: int = 0,
) -> tuple[FeatureMap, MatchResult, SigmaVector]:
    """Full diversified swap: extract, shift-normalize, match, reconstruct.

    Returns the swapped map together with the match and the sigma draw that
    produced it, so callers can audit or reproduce the result.  With
    distribution "none" this is exactly the deterministic baseline swap.
    """
    if content.channels != style.channels:
        raise DimensionError(
            f"channel mismatch: content {content.channels} vs style {style.channels}"
        )
    content_grid = extract_patches(content, config.patch_size, config.stride)
    style_grid = extract_patches(style, config.patch_size, config.stride)
    sigmas = sample_sigmas(style_grid.n_patches, config, output_index)
    normalized = shifted_normalize(style_grid, sigmas, config.epsilon)
    match = ncc_match(content_grid, normalized)
    swapped = reconstruct(match, style_grid, content_grid, content_map=content)
    return swapped, match, sigmas


@dataclass(frozen=True)
class FlipAuditReport:
    """How many assignments the sigma shift flipped, and whether every flip
    obeyed the rank-inversion inequality it must satisfy."""

    n_flipped: int
    inequality_violations: int
    higher_norm_fraction: float


def flip_audit(
    content: PatchGrid,
    style: PatchGrid,
    baseline: MatchResult,
    shifted: MatchResult,
    sigmas: SigmaVector,
    slack: float = 1e-6,
) -> FlipAuditReport:
    """Check every flipped assignment against the inversion inequality.

    A flip replaces baseline winner a by shifted winner b.  Whenever the
    baseline cosine of a strictly beats b's, cross-multiplying the two
    shifted scores forces

        <c, s_b> * sigma_a - <c, s_a> * sigma_b
            > <c, s_a> * ||s_b|| - <c, s_b> * ||s_a||   (right side > 0)

    and hence <c, s_b> * sigma_a > <c, s_a> * sigma_b.  Any flip breaking
    either inequality by more than `slack` counts as a violation; a correct
    swap never produces one.  The report also tallies how often the new
    winner has the larger norm, over all flips.
    """
    if len(baseline) != len(shifted) or len(baseline) != content.n_patches:
        raise ConsistencyError("baseline/shifted/content sizes do not line up")
    if len(sigmas) != style.n_patches:
        raise ConsistencyError(
            f"{len(sigmas)} sigmas for {style.n_patches} style patches"
        )
    for match in (baseline, shifted):
        if len(match) and (
            match.assignments.min() < 0 or match.assignments.max() >= style.n_patches
        ):
            raise ConsistencyError("match indices outside the style grid")

    flipped = np.flatnonzero(baseline.assignments != shifted.assignments)
    if flipped.size == 0:
        return FlipAuditReport(0, 0, 0.0)

    a = baseline.assignments[flipped]
    b = shifted.assignments[flipped]
    c_rows = content.patches[flipped]
    dot_a = np.einsum("ij,ij->i", c_rows, style.patches[a])
    dot_b = np.einsum("ij,ij->i", c_rows, style.patches[b])
    norms = patch_norms(style)
    norm_a, norm_b = norms[a], norms[b]

    # Cosine ordering must be strict (and well defined) for the derivation
    # to apply; exact ties and degenerate zero-norm rows are skipped.
    defined = (norm_a > 0) & (norm_b > 0)
    ordered = defined & (dot_a * norm_b > dot_b * norm_a)
    sigma_a = sigmas.values[a]
    sigma_b = sigmas.values[b]
    rearranged = (dot_b * sigma_a - dot_a * sigma_b) - (
        dot_a * norm_b - dot_b * norm_a
    )
    product = dot_b * sigma_a - dot_a * sigma_b
    violations = ordered & ((rearranged < -slack) | (product < -slack))

    return FlipAuditReport(
        n_flipped=int(flipped.size),
        inequality_violations=int(np.count_nonzero(violations)),
        higher_norm_fraction=float(np.mean(norm_b > norm_a)),
    )
