"""Writer for the SUSX v1 embedding-bank binary format.

This is the extractor's own implementation of the wire format; the
engine package is consumed only through the files themselves.
"""
from __future__ import annotations

import json
import struct

import numpy as np

MAGIC = b"SUSX"
VERSION = 1

FLAG_LABELS = 0x1
FLAG_IDS = 0x2
FLAG_NORMALIZED = 0x4

_HEADER = struct.Struct("<4sHHQQQ")


def write_bank(
    path,
    data: np.ndarray,
    labels=None,
    ids=None,
    normalized: bool = False,
    meta: dict[str, str] | None = None,
) -> None:
    """Serialize an n x d float matrix with optional sections."""
    data = np.ascontiguousarray(data, dtype=np.float64)
    if data.ndim != 2:
        raise ValueError(f"data must be 2-D, got shape {data.shape}")
    n, d = data.shape
    if not np.all(np.isfinite(data)):
        raise ValueError("data contains non-finite values")
    flags = 0
    if labels is not None:
        labels = np.ascontiguousarray(labels, dtype="<u4")
        if labels.shape != (n,):
            raise ValueError("labels length must match row count")
        flags |= FLAG_LABELS
    if ids is not None:
        ids = list(ids)
        if len(ids) != n:
            raise ValueError("ids length must match row count")
        flags |= FLAG_IDS
    if normalized:
        flags |= FLAG_NORMALIZED
    meta_blob = json.dumps(
        {str(k): str(v) for k, v in (meta or {}).items()},
        sort_keys=True, separators=(",", ":"),
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, flags, n, d, len(meta_blob)))
        fh.write(meta_blob)
        fh.write(data.astype("<f4").tobytes())
        if labels is not None:
            fh.write(labels.tobytes())
        if ids is not None:
            for s in ids:
                b = str(s).encode("utf-8")
                fh.write(struct.pack("<I", len(b)))
                fh.write(b)
