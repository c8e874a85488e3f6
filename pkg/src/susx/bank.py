"""Binary embedding-bank format: validation, load, save, normalization.

File layout (all integers little-endian):

==========  =====================================================
bytes 0-3   magic ``SUSX`` (ASCII)
bytes 4-5   format version, u16, currently 1
bytes 6-7   flags, u16: bit0 labels, bit1 ids, bit2 normalized
bytes 8-15  row count ``n``, u64
bytes 16-23 embedding dim ``d``, u64
bytes 24-31 metadata blob byte length, u64
then        metadata blob: UTF-8 JSON object of string -> string
then        ``n * d`` float32 scalars, row-major
then        if bit0: ``n`` u32 labels
then        if bit1: ``n`` strings, each u32 byte length + UTF-8 bytes
==========  =====================================================

Scalars are stored as float32; in memory all math runs at float64.
Loading never normalizes: the ``normalized`` flag only records what the
producer claims, and :func:`l2_normalize` is the one place that sets it.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    DegenerateRow,
    DimensionMismatch,
    IoFailure,
    LabelOutOfRange,
    MalformedHeader,
    NonFiniteValue,
    UnnormalizedInput,
)

MAGIC = b"SUSX"
FORMAT_VERSION = 1

_FLAG_LABELS = 0x1
_FLAG_IDS = 0x2
_FLAG_NORMALIZED = 0x4

_HEADER = struct.Struct("<4sHHQQQ")


@dataclass(frozen=True)
class EmbeddingBank:
    """An n x d matrix of embeddings with optional labels and ids.

    Immutable after construction; operations return new banks.
    """

    dim: int
    count: int
    data: np.ndarray  # (count, dim) float64
    labels: np.ndarray | None = None  # (count,) uint32
    ids: tuple[str, ...] | None = None
    normalized: bool = False
    meta: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "data", np.ascontiguousarray(self.data, dtype=np.float64))
        if self.labels is not None:
            object.__setattr__(self, "labels", np.ascontiguousarray(self.labels, dtype=np.uint32))
        if self.ids is not None:
            object.__setattr__(self, "ids", tuple(self.ids))
        self.validate()

    def validate(self) -> None:
        if self.dim <= 0:
            raise DimensionMismatch(f"dim must be positive, got {self.dim}")
        if self.count < 0:
            raise DimensionMismatch(f"count must be non-negative, got {self.count}")
        if self.data.shape != (self.count, self.dim):
            raise DimensionMismatch(
                f"data shape {self.data.shape} != declared ({self.count}, {self.dim})"
            )
        if not np.all(np.isfinite(self.data)):
            raise NonFiniteValue("bank data contains NaN or infinity")
        if self.labels is not None and self.labels.shape != (self.count,):
            raise DimensionMismatch(
                f"labels length {self.labels.shape} != count {self.count}"
            )
        if self.ids is not None and len(self.ids) != self.count:
            raise DimensionMismatch(
                f"ids length {len(self.ids)} != count {self.count}"
            )
        if self.normalized and self.count > 0:
            norms = np.linalg.norm(self.data, axis=1)
            bad = np.abs(norms - 1.0) > 1e-4
            if np.any(bad):
                idx = int(np.argmax(bad))
                raise UnnormalizedInput(
                    f"normalized flag set but row {idx} has norm {norms[idx]:.6g}"
                )
        # Labels can only be range-checked when the producer recorded the
        # class count; otherwise any u32 is structurally valid.
        if self.labels is not None and "num_classes" in self.meta:
            c = int(self.meta["num_classes"])
            if self.count > 0 and int(self.labels.max(initial=0)) >= c:
                raise LabelOutOfRange(
                    f"label {int(self.labels.max())} >= num_classes {c}"
                )

    def with_meta(self, **entries: str) -> "EmbeddingBank":
        merged = dict(self.meta)
        merged.update(entries)
        return replace(self, meta=merged)


def save_bank(bank: EmbeddingBank, path) -> None:
    """Write ``bank`` to ``path`` in the SUSX v1 binary format."""
    bank.validate()
    flags = 0
    if bank.labels is not None:
        flags |= _FLAG_LABELS
    if bank.ids is not None:
        flags |= _FLAG_IDS
    if bank.normalized:
        flags |= _FLAG_NORMALIZED
    meta_blob = json.dumps(bank.meta, sort_keys=True, separators=(",", ":")).encode("utf-8")
    try:
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, flags,
                                  bank.count, bank.dim, len(meta_blob)))
            fh.write(meta_blob)
            fh.write(bank.data.astype("<f4").tobytes())
            if bank.labels is not None:
                fh.write(bank.labels.astype("<u4").tobytes())
            if bank.ids is not None:
                for s in bank.ids:
                    b = s.encode("utf-8")
                    fh.write(struct.pack("<I", len(b)))
                    fh.write(b)
    except OSError as e:
        raise IoFailure(str(e)) from e


def load_bank(path) -> EmbeddingBank:
    """Read and fully validate a SUSX v1 bank file."""
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as e:
        raise IoFailure(str(e)) from e

    if len(blob) < _HEADER.size:
        raise MalformedHeader("file shorter than header")
    magic, version, flags, count, dim, meta_len = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise MalformedHeader(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise MalformedHeader(f"unsupported version {version}")
    off = _HEADER.size

    if len(blob) < off + meta_len:
        raise MalformedHeader("truncated metadata blob")
    try:
        meta = json.loads(blob[off:off + meta_len].decode("utf-8")) if meta_len else {}
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise MalformedHeader(f"metadata blob is not valid JSON: {e}") from e
    if not isinstance(meta, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in meta.items()
    ):
        raise MalformedHeader("metadata must be a JSON object of string -> string")
    off += meta_len

    payload_bytes = count * dim * 4
    if len(blob) < off + payload_bytes:
        raise DimensionMismatch(
            f"declared {count}x{dim} needs {payload_bytes} payload bytes, "
            f"only {len(blob) - off} present"
        )
    data = np.frombuffer(blob, dtype="<f4", count=count * dim, offset=off)
    data = data.reshape(count, dim).astype(np.float64)
    off += payload_bytes

    labels = None
    if flags & _FLAG_LABELS:
        need = count * 4
        if len(blob) < off + need:
            raise DimensionMismatch("truncated label section")
        labels = np.frombuffer(blob, dtype="<u4", count=count, offset=off).copy()
        off += need

    ids = None
    if flags & _FLAG_IDS:
        out = []
        for _ in range(count):
            if len(blob) < off + 4:
                raise DimensionMismatch("truncated id section")
            (slen,) = struct.unpack_from("<I", blob, off)
            off += 4
            if len(blob) < off + slen:
                raise DimensionMismatch("truncated id string")
            out.append(blob[off:off + slen].decode("utf-8"))
            off += slen
        ids = tuple(out)

    if len(blob) != off:
        raise DimensionMismatch(f"{len(blob) - off} trailing bytes after payload")

    return EmbeddingBank(
        dim=dim, count=count, data=data, labels=labels, ids=ids,
        normalized=bool(flags & _FLAG_NORMALIZED), meta=meta,
    )


def l2_normalize(bank: EmbeddingBank) -> EmbeddingBank:
    """Return a copy of ``bank`` with unit-norm rows and the flag set.

    Raises :class:`DegenerateRow` for any row with norm below 1e-8.
    Idempotent, and preserves every pairwise cosine similarity.
    """
    norms = np.linalg.norm(bank.data, axis=1)
    small = norms < 1e-8
    if np.any(small):
        raise DegenerateRow(int(np.argmax(small)))
    data = bank.data / norms[:, None]
    return replace(bank, data=data, normalized=True)
