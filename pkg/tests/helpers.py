"""Shared fixtures and naive reference implementations.

The fold/unfold helpers here are deliberately plain Python loops so they
share nothing with the vectorized kernels they are used to verify.
"""

import numpy as np

from divswap import FeatureMap
from divswap.patch_ops import PatchGrid


def random_map(rng, c, h, w, relu=False):
    values = rng.standard_normal((c, h, w))
    if relu:
        values = np.maximum(values, 0.0)
    return FeatureMap(values.astype(np.float32))


def naive_unfold(values, k, s):
    """Window extraction by explicit loops; rows channel-major."""
    c, h, w = values.shape
    rows = []
    for top in range(0, h - k + 1, s):
        for left in range(0, w - k + 1, s):
            rows.append(np.asarray(values[:, top : top + k, left : left + k], dtype=np.float64).reshape(-1))
    return np.array(rows)


def naive_fold(style_rows, assignments, k, s, grid_rows, grid_cols, c, h, w, combine="average"):
    """Overlap-accumulating reconstruction by explicit loops."""
    acc = np.zeros((c, h, w))
    hits = np.zeros((h, w))
    p = 0
    for gi in range(grid_rows):
        for gj in range(grid_cols):
            patch = np.asarray(style_rows[assignments[p]], dtype=np.float64).reshape(c, k, k)
            acc[:, gi * s : gi * s + k, gj * s : gj * s + k] += patch
            hits[gi * s : gi * s + k, gj * s : gj * s + k] += 1
            p += 1
    if combine == "average":
        covered = hits > 0
        acc = np.divide(acc, hits, out=acc, where=covered)
    return acc, hits


def grid_from_rows(rows, c=3, k=3):
    """A dimensionally consistent single-column PatchGrid over raw rows."""
    rows = np.asarray(rows, dtype=np.float64)
    n, d = rows.shape
    assert d == c * k * k, "rows must have length c*k*k"
    return PatchGrid(
        patch_size=k,
        stride=1,
        grid_rows=n,
        grid_cols=1,
        patches=rows,
        source_dims=(c, n - 1 + k, k),
    )


def full_coverage_configs(h, w, max_k=None):
    """All (k, s) whose windows tile the h x w plane with no uncovered cell."""
    configs = []
    top = min(h, w) if max_k is None else min(h, w, max_k)
    for k in range(1, top + 1):
        for s in range(1, k + 1):
            if (h - k) % s == 0 and (w - k) % s == 0:
                configs.append((k, s))
    return configs
