"""Reader/writer for the .dsfm feature-map interchange format.

Standalone implementation of the documented byte layout; this package
talks to the swap engine only through files in this format:

    bytes 0-3    ASCII "DSFM"
    byte  4      version (0x01)
    bytes 5-16   C, H, W little-endian uint32
    remainder    C*H*W little-endian float32, channel-major

File length must be exactly 17 + 4*C*H*W.
"""

import os
import struct
import tempfile

import numpy as np

MAGIC = b"DSFM"
VERSION = 1
_HEADER = struct.Struct("<4sB3I")


class DsfmError(ValueError):
    """Malformed .dsfm payload."""


def read_dsfm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size:
        raise DsfmError(f"{path}: shorter than the {_HEADER.size}-byte header")
    magic, version, c, h, w = _HEADER.unpack_from(blob)
    if magic != MAGIC or version != VERSION:
        raise DsfmError(f"{path}: bad magic/version {magic!r} v{version}")
    if min(c, h, w) < 1 or len(blob) != _HEADER.size + 4 * c * h * w:
        raise DsfmError(f"{path}: inconsistent dimensions or payload size")
    values = np.frombuffer(blob, dtype="<f4", offset=_HEADER.size).reshape(c, h, w)
    if not np.isfinite(values).all():
        raise DsfmError(f"{path}: non-finite values")
    return values.copy()


def write_dsfm(path, values: np.ndarray) -> None:
    values = np.ascontiguousarray(values, dtype=np.float32)
    if values.ndim != 3 or min(values.shape) < 1:
        raise DsfmError(f"expected a (C, H, W) array, got shape {values.shape}")
    if not np.isfinite(values).all():
        raise DsfmError("refusing to write non-finite values")
    c, h, w = values.shape
    blob = _HEADER.pack(MAGIC, VERSION, c, h, w) + values.astype("<f4").tobytes()
    directory = os.path.dirname(os.fspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(blob)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
