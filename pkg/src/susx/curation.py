"""Support-set construction: retrieval, ingestion, K-shot sampling, diversity."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bank import EmbeddingBank
from .classifier import ClassifierWeights
from .errors import (
    DimensionMismatch,
    EmptyClass,
    InsufficientCandidates,
    InsufficientShots,
    LabelOutOfRange,
    MissingLabels,
    UnnormalizedInput,
)


@dataclass(frozen=True)
class SupportSet:
    """Normalized support features with class indices and one-hot labels."""

    F: np.ndarray  # (m, d) float64
    classes: np.ndarray  # (m,) int64
    num_classes: int
    meta: dict | None = None

    def __post_init__(self):
        object.__setattr__(self, "F", np.ascontiguousarray(self.F, dtype=np.float64))
        object.__setattr__(self, "classes", np.ascontiguousarray(self.classes, dtype=np.int64))
        if self.F.ndim != 2 or self.F.shape[0] != self.classes.shape[0]:
            raise DimensionMismatch(
                f"features {self.F.shape} vs {self.classes.shape[0]} class indices"
            )
        if self.F.shape[0] < 1:
            raise DimensionMismatch("support set must have at least one row")
        if self.classes.min() < 0 or self.classes.max() >= self.num_classes:
            raise LabelOutOfRange(
                f"class indices must lie in [0, {self.num_classes})"
            )

    @property
    def m(self) -> int:
        return self.F.shape[0]

    @property
    def one_hot(self) -> np.ndarray:
        L = np.zeros((self.m, self.num_classes))
        L[np.arange(self.m), self.classes] = 1.0
        return L

    def to_bank(self, normalized: bool = True) -> EmbeddingBank:
        meta = {k: str(v) for k, v in (self.meta or {}).items()}
        meta["num_classes"] = str(self.num_classes)
        return EmbeddingBank(
            dim=self.F.shape[1], count=self.m, data=self.F,
            labels=self.classes.astype(np.uint32),
            normalized=normalized, meta=meta,
        )


def retrieve_support(
    candidates: EmbeddingBank,
    W: ClassifierWeights,
    n_per_class: int,
    dedup: bool = False,
) -> SupportSet:
    """Top-N candidates per class by cosine to that class's classifier row.

    Per-class rankings are independent, so a candidate may serve several
    classes unless ``dedup`` removes rows already taken by earlier classes.
    Within a class, rows are ordered by descending similarity with ties
    broken by ascending candidate index.
    """
    if candidates.dim != W.dim:
        raise DimensionMismatch(f"candidate dim {candidates.dim} != {W.dim}")
    if not candidates.normalized:
        raise UnnormalizedInput("candidate bank must be normalized")
    if n_per_class < 1 or candidates.count < n_per_class:
        raise InsufficientCandidates(
            f"{candidates.count} candidates, need at least {n_per_class}"
        )
    sims = candidates.data @ W.W.T  # (n, C)
    idx = np.arange(candidates.count)
    taken: set[int] = set()
    feats, classes = [], []
    for c in range(W.vocabulary.num_classes):
        order = np.lexsort((idx, -sims[:, c]))
        if dedup:
            order = [i for i in order if i not in taken]
        if len(order) < n_per_class:
            raise InsufficientCandidates(
                f"class {c}: only {len(order)} candidates remain after dedup"
            )
        chosen = list(order[:n_per_class])
        taken.update(chosen)
        feats.append(candidates.data[chosen])
        classes.extend([c] * n_per_class)
    return SupportSet(
        F=np.vstack(feats), classes=np.array(classes),
        num_classes=W.vocabulary.num_classes,
        meta={"source": "retrieval", "n_per_class": n_per_class,
              "dedup": dedup},
    )


def ingest_support(bank: EmbeddingBank, num_classes: int) -> SupportSet:
    """Adopt an externally produced labeled bank as the support set."""
    if bank.labels is None:
        raise MissingLabels("support bank has no labels")
    if not bank.normalized:
        raise UnnormalizedInput("support bank must be normalized")
    if bank.count > 0 and int(bank.labels.max()) >= num_classes:
        raise LabelOutOfRange(
            f"label {int(bank.labels.max())} >= num_classes {num_classes}"
        )
    return SupportSet(
        F=bank.data, classes=bank.labels.astype(np.int64),
        num_classes=num_classes,
        meta={"source": "ingest", **bank.meta},
    )


def sample_few_shot(bank: EmbeddingBank, k: int, seed: int) -> SupportSet:
    """Draw K rows per class with a seeded PCG64 permutation per class.

    Classes are visited in ascending index order; within a class the K
    sampled rows keep their original bank order. Identical (bank, k, seed)
    reproduce the same support set bit-for-bit.
    """
    if bank.labels is None:
        raise MissingLabels("few-shot sampling needs a labeled bank")
    if not bank.normalized:
        raise UnnormalizedInput("few-shot bank must be normalized")
    num_classes = int(bank.labels.max()) + 1 if bank.count else 0
    rng = np.random.Generator(np.random.PCG64(seed))
    feats, classes = [], []
    for c in range(num_classes):
        rows = np.flatnonzero(bank.labels == c)
        if rows.size < k:
            raise InsufficientShots(c, rows.size, k)
        pick = np.sort(rng.permutation(rows)[:k])
        feats.append(bank.data[pick])
        classes.extend([c] * k)
    return SupportSet(
        F=np.vstack(feats), classes=np.array(classes), num_classes=num_classes,
        meta={"source": "few-shot", "k": k, "seed": seed},
    )


def support_from_set(support: SupportSet) -> tuple[np.ndarray, np.ndarray]:
    """Convenience accessor: (F, one-hot L)."""
    return support.F, support.one_hot


def diversity(support: SupportSet) -> float:
    """1 minus the mean per-class pairwise cosine similarity.

    The pairwise sum runs over all ordered pairs including self-pairs and
    is normalized by the squared class size; a single-row class therefore
    contributes a per-class similarity of exactly 1.
    """
    pcs = []
    for c in range(support.num_classes):
        Fc = support.F[support.classes == c]
        n = Fc.shape[0]
        if n == 0:
            raise EmptyClass(c)
        sims = Fc @ Fc.T
        pcs.append(sims.sum() / (n * n))
    return float(1.0 - np.mean(pcs))
