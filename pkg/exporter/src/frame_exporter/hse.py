"""Writer for the .hse embedding container.

Layout, from the published file-format table:

    offset 0   4 bytes   magic "HSE1"
    offset 4   uint32    format version, currently 1
    offset 8   uint32    row count n
    offset 12  uint32    dimension d
    offset 16  float32   logit scale (finite, positive)
    offset 20  n*d float32 values, row major

All integers and floats are little endian.  The exporter only ever writes
this format; reading it back is the consuming toolkit's job.
"""

from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import ExporterError

MAGIC = b"HSE1"
VERSION = 1

_HEADER = struct.Struct("<4sIIIf")


def pack_embeddings(rows: np.ndarray, scale: float) -> bytes:
    """Serialize an (n, d) float array plus its logit scale.

    Rejects anything that a reader would refuse: non-2D input, zero
    dimension, non-finite values, or a scale that is not finite and
    positive.
    """
    arr = np.asarray(rows, dtype=np.float32)
    if arr.ndim != 2:
        raise ExporterError(f"embedding array must be 2-D, got shape {arr.shape}")
    n, d = arr.shape
    if d == 0:
        raise ExporterError("embedding dimension must be at least 1")
    if not np.all(np.isfinite(arr)):
        raise ExporterError("embedding array contains non-finite values")
    scale = float(scale)
    if not np.isfinite(scale) or scale <= 0.0:
        raise ExporterError(f"logit scale must be finite and positive, got {scale}")
    header = _HEADER.pack(MAGIC, VERSION, n, d, scale)
    return header + np.ascontiguousarray(arr).tobytes()


def atomic_write_bytes(path: Path, data: bytes) -> None:
    """Write data to path via a same-directory temp file and rename.

    A crash mid-write leaves either the old file or nothing, never a
    truncated one.
    """
    path = Path(path)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def write_embeddings(path: Path, rows: np.ndarray, scale: float) -> None:
    """Pack rows and write them to path atomically."""
    atomic_write_bytes(Path(path), pack_embeddings(rows, scale))
