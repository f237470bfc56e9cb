"""Sliding-window patch extraction, dense NCC matching, and reconstruction.

The matching kernel realizes the similarity search as one dense matrix
product of the content-patch matrix against the transposed style-patch
matrix, streamed in row blocks with a running argmax so the full score
matrix is never retained.  A deliberately naive per-row scorer is kept
alongside it as a verification oracle.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .exceptions import ArgumentError, ConsistencyError, DimensionError, ValidationError
from .feature_tensor import FeatureMap, write_bytes_atomic

# Content rows are matched in blocks of this many rows against all style rows.
MATCH_BLOCK_ROWS = 512


@dataclass(frozen=True)
class PatchGrid:
    """Matrix view of all sliding windows of a feature map.

    Row i is the window at grid position (i // grid_cols, i % grid_cols),
    scaled by `stride`, flattened channel-major (all of channel 0's k*k
    block row-major, then channel 1, ...).  Rows are float64 so downstream
    inner products are computed at full precision regardless of the float32
    storage of the originating map.
    """

    patch_size: int
    stride: int
    grid_rows: int
    grid_cols: int
    patches: np.ndarray
    source_dims: tuple[int, int, int]  # (C, H, W) of the originating map

    def __post_init__(self):
        if self.patch_size < 1 or self.stride < 1:
            raise ArgumentError("patch_size and stride must be >= 1")
        arr = np.asarray(self.patches, dtype=np.float64)
        if arr.ndim != 2:
            raise ValidationError(f"patches must be 2-D, got shape {arr.shape}")
        if arr.shape[0] != self.grid_rows * self.grid_cols or arr.shape[0] < 1:
            raise ValidationError(
                f"{arr.shape[0]} patch rows inconsistent with "
                f"{self.grid_rows}x{self.grid_cols} grid"
            )
        c = self.source_dims[0]
        if arr.shape[1] != c * self.patch_size**2:
            raise ValidationError(
                f"row length {arr.shape[1]} != C*k*k = {c * self.patch_size ** 2}"
            )
        if not np.isfinite(arr).all():
            raise ValidationError("patch grid contains NaN or Inf values")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "patches", arr)

    @property
    def n_patches(self) -> int:
        return self.patches.shape[0]

    @property
    def dim(self) -> int:
        return self.patches.shape[1]


@dataclass(frozen=True)
class MatchResult:
    """Winning style index and inner-product score per content patch."""

    assignments: np.ndarray  # (n_c,) int64, each in [0, n_style)
    scores: np.ndarray  # (n_c,) float64

    def __post_init__(self):
        idx = np.ascontiguousarray(np.asarray(self.assignments, dtype=np.int64))
        sc = np.ascontiguousarray(np.asarray(self.scores, dtype=np.float64))
        if idx.ndim != 1 or sc.shape != idx.shape:
            raise ValidationError("assignments and scores must be 1-D and equal length")
        idx.flags.writeable = False
        sc.flags.writeable = False
        object.__setattr__(self, "assignments", idx)
        object.__setattr__(self, "scores", sc)

    def __len__(self) -> int:
        return self.assignments.shape[0]


def extract_patches(fmap: FeatureMap, patch_size: int, stride: int) -> PatchGrid:
    """im2col: every k x k window of `fmap`, row-major over grid positions."""
    if patch_size < 1:
        raise ArgumentError(f"patch_size must be >= 1, got {patch_size}")
    if stride < 1:
        raise ArgumentError(f"stride must be >= 1, got {stride}")
    c, h, w = fmap.values.shape
    if patch_size > h or patch_size > w:
        raise DimensionError(
            f"patch_size {patch_size} exceeds spatial dims {h}x{w}"
        )
    windows = sliding_window_view(fmap.values, (patch_size, patch_size), axis=(1, 2))
    windows = windows[:, ::stride, ::stride]  # (C, gr, gc, k, k)
    gr, gc = windows.shape[1], windows.shape[2]
    rows = windows.transpose(1, 2, 0, 3, 4).reshape(gr * gc, c * patch_size**2)
    return PatchGrid(
        patch_size=patch_size,
        stride=stride,
        grid_rows=gr,
        grid_cols=gc,
        patches=rows.astype(np.float64),
        source_dims=(c, h, w),
    )


def patch_norms(grid: PatchGrid) -> np.ndarray:
    """Euclidean norm of every patch row."""
    return np.linalg.norm(grid.patches, axis=1)


def ncc_match(content: PatchGrid, style_normalized: PatchGrid) -> MatchResult:
    """Best style row per content row under the inner-product score.

    Style rows must already be normalized by the caller (plain or shifted);
    the content norm is omitted since it cannot change any row's argmax.
    Ties break to the smallest style index, which keeps the result
    independent of evaluation order.
    """
    _check_matchable(content, style_normalized)
    style_t = style_normalized.patches.T
    n = content.n_patches
    assignments = np.empty(n, dtype=np.int64)
    scores = np.empty(n, dtype=np.float64)
    for start in range(0, n, MATCH_BLOCK_ROWS):
        stop = min(start + MATCH_BLOCK_ROWS, n)
        block = content.patches[start:stop] @ style_t
        idx = np.argmax(block, axis=1)  # first max == smallest winning index
        assignments[start:stop] = idx
        scores[start:stop] = block[np.arange(stop - start), idx]
    return MatchResult(assignments=assignments, scores=scores)


def ncc_match_oracle(content: PatchGrid, style_normalized: PatchGrid) -> MatchResult:
    """Same contract as :func:`ncc_match`, naive realization.

    One content row at a time, scored by elementwise multiply-and-sum
    against every style row.  Shares no kernel code with the blocked
    matcher; exists purely to cross-check it.
    """
    _check_matchable(content, style_normalized)
    style = style_normalized.patches
    assignments = np.empty(content.n_patches, dtype=np.int64)
    scores = np.empty(content.n_patches, dtype=np.float64)
    for i, row in enumerate(content.patches):
        row_scores = (style * row).sum(axis=1)
        j = int(np.argmax(row_scores))
        assignments[i] = j
        scores[i] = row_scores[j]
    return MatchResult(assignments=assignments, scores=scores)


def _check_matchable(content: PatchGrid, style: PatchGrid) -> None:
    if content.n_patches == 0 or style.n_patches == 0:
        raise ArgumentError("cannot match empty patch grids")
    if content.dim != style.dim:
        raise DimensionError(
            f"patch dims differ: content {content.dim} vs style {style.dim}"
        )


def reconstruct(
    match: MatchResult,
    style_original: PatchGrid,
    content_layout: PatchGrid,
    content_map: FeatureMap | None = None,
    combine: str = "average",
) -> FeatureMap:
    """col2im: place the matched original style patches on the content grid.

    Each assigned patch is written at its content grid position; cells hit
    by several windows take the mean of the contributions ("average"), or
    the raw sum with combine="sum".  When the stride leaves trailing cells
    uncovered, they are copied from `content_map`, which must then be given.

    Only the layout fields of `content_layout` are used, never its rows.
    """
    if combine not in ("average", "sum"):
        raise ArgumentError(f"combine must be 'average' or 'sum', got {combine!r}")
    if len(match) != content_layout.n_patches:
        raise ConsistencyError(
            f"{len(match)} assignments for {content_layout.n_patches} grid positions"
        )
    if len(match) and (
        match.assignments.min() < 0
        or match.assignments.max() >= style_original.n_patches
    ):
        raise ConsistencyError("assignment index outside the style grid")
    if style_original.dim != content_layout.dim:
        raise DimensionError(
            f"style rows of dim {style_original.dim} cannot fill a layout of dim "
            f"{content_layout.dim}"
        )

    c, h, w = content_layout.source_dims
    k = content_layout.patch_size
    s = content_layout.stride
    gr, gc = content_layout.grid_rows, content_layout.grid_cols

    chosen = style_original.patches[match.assignments].reshape(gr, gc, c, k, k)
    acc = np.zeros((c, h, w), dtype=np.float64)
    hits = np.zeros((h, w), dtype=np.int64)
    for ki in range(k):
        for kj in range(k):
            acc[:, ki : ki + gr * s : s, kj : kj + gc * s : s] += chosen[
                :, :, :, ki, kj
            ].transpose(2, 0, 1)
            hits[ki : ki + gr * s : s, kj : kj + gc * s : s] += 1

    covered = hits > 0
    if combine == "average":
        out = np.divide(acc, hits, out=np.zeros_like(acc), where=covered)
    else:
        out = acc
    if not covered.all():
        if content_map is None:
            raise ArgumentError(
                "stride leaves cells uncovered; pass content_map to fill them"
            )
        if content_map.values.shape != (c, h, w):
            raise DimensionError(
                f"content_map shape {content_map.values.shape} != layout dims {(c, h, w)}"
            )
        out = np.where(covered, out, content_map.values.astype(np.float64))
    return FeatureMap(out.astype(np.float32))


def write_match_csv(match: MatchResult, path: str | os.PathLike) -> None:
    """Export a match table as CSV: content_index,style_index,score."""
    lines = ["content_index,style_index,score"]
    for i, (j, score) in enumerate(zip(match.assignments, match.scores)):
        lines.append(f"{i},{j},{score:.9g}")
    write_bytes_atomic(path, ("\n".join(lines) + "\n").encode("ascii"))


def grid_with_patches(grid: PatchGrid, patches: np.ndarray) -> PatchGrid:
    """A grid sharing `grid`'s layout but holding different row values."""
    return replace(grid, patches=patches)
