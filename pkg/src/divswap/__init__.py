"""Diversified patch-based style swapping on activation feature maps."""

from .divswapper import (
    PRESETS,
    FlipAuditReport,
    SigmaVector,
    SwapConfig,
    baseline_config,
    div_swap,
    flip_audit,
    preset_config,
    sample_sigmas,
    shifted_normalize,
)
from .exceptions import (
    ArgumentError,
    ConsistencyError,
    DimensionError,
    DivSwapError,
    FormatError,
    UsageError,
    ValidationError,
)
from .feature_tensor import (
    FeatureMap,
    channel_l2_map,
    load_feature_map,
    save_feature_map,
)
from .metrics import (
    DiversityReport,
    RgbImage,
    feature_distance,
    heatmap_png,
    load_png,
    pairwise_report,
    pixel_distance,
    save_png,
)
from .patch_ops import (
    MatchResult,
    PatchGrid,
    extract_patches,
    ncc_match,
    ncc_match_oracle,
    patch_norms,
    reconstruct,
    write_match_csv,
)

__version__ = "0.1.0"
