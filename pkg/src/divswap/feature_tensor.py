"""Dense activation tensors and the .dsfm on-disk format.

A FeatureMap is an immutable C-channel spatial tensor stored channel-major
(c, then row, then column).  The binary format mirrors the memory layout so
I/O never transposes:

    bytes 0-3    ASCII "DSFM"
    byte  4      format version (0x01)
    bytes 5-16   C, H, W as little-endian uint32
    remainder    C*H*W little-endian IEEE-754 float32, channel-major

A well-formed file is exactly 17 + 4*C*H*W bytes long.
"""

from __future__ import annotations

import os
import struct
import tempfile
from dataclasses import dataclass

import numpy as np

from .exceptions import FormatError, ValidationError

MAGIC = b"DSFM"
VERSION = 1
HEADER = struct.Struct("<4sB3I")
HEADER_SIZE = HEADER.size  # 17


@dataclass(frozen=True)
class FeatureMap:
    """Immutable (C, H, W) float32 activation tensor.

    Values may be negative in general; maps that came out of a ReLU layer
    can additionally be checked with :meth:`require_post_relu`.
    """

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values)
        if arr.ndim != 3:
            raise ValidationError(f"expected a (C, H, W) array, got shape {arr.shape}")
        if min(arr.shape) < 1:
            raise ValidationError(f"all dimensions must be >= 1, got {arr.shape}")
        arr = np.array(arr, dtype=np.float32, order="C", copy=True)
        if not np.isfinite(arr).all():
            raise ValidationError("feature map contains NaN or Inf values")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def channels(self) -> int:
        return self.values.shape[0]

    @property
    def height(self) -> int:
        return self.values.shape[1]

    @property
    def width(self) -> int:
        return self.values.shape[2]

    def require_post_relu(self) -> "FeatureMap":
        """Assert the post-ReLU contract (no negative activations)."""
        if (self.values < 0).any():
            raise ValidationError("map declared post-ReLU but contains negatives")
        return self


def save_feature_map(fmap: FeatureMap, path: str | os.PathLike) -> None:
    """Write `fmap` to `path` in the .dsfm format.

    Byte output is deterministic for identical input.  The file is written
    to a temporary sibling and renamed into place, so a failed write never
    leaves a partial file behind.
    """
    header = HEADER.pack(MAGIC, VERSION, fmap.channels, fmap.height, fmap.width)
    payload = fmap.values.astype("<f4", copy=False).tobytes()
    write_bytes_atomic(path, header + payload)


def load_feature_map(path: str | os.PathLike) -> FeatureMap:
    """Read a .dsfm file, rejecting anything malformed."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < HEADER_SIZE:
        raise FormatError(f"{path}: file shorter than the {HEADER_SIZE}-byte header")
    magic, version, c, h, w = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported format version {version}")
    if min(c, h, w) < 1:
        raise FormatError(f"{path}: header declares a zero dimension ({c}x{h}x{w})")
    expected = HEADER_SIZE + 4 * c * h * w
    if len(data) != expected:
        raise FormatError(
            f"{path}: payload size mismatch, expected {expected} bytes, got {len(data)}"
        )
    values = np.frombuffer(data, dtype="<f4", offset=HEADER_SIZE).reshape(c, h, w)
    return FeatureMap(values)


def channel_l2_map(fmap: FeatureMap) -> np.ndarray:
    """Per-location magnitude across channels: out[h, w] = ||values[:, h, w]||."""
    return np.sqrt(np.sum(fmap.values.astype(np.float64) ** 2, axis=0))


def write_bytes_atomic(path: str | os.PathLike, data: bytes) -> None:
    """Write `data` to `path` via a temp file + rename."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
