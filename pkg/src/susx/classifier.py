"""Text-classifier construction, zero-shot logits, and similarity diagnostics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bank import EmbeddingBank
from .errors import (
    DegenerateMean,
    DimensionMismatch,
    EmptyClass,
    InsufficientRows,
    LabelOutOfRange,
    MissingLabels,
    UnnormalizedInput,
)


@dataclass(frozen=True)
class ClassVocabulary:
    """Ordered class names; position defines the class index."""

    names: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        if not self.names:
            raise EmptyClass(0)
        if len(set(self.names)) != len(self.names):
            raise DimensionMismatch("class names must be unique")

    @property
    def num_classes(self) -> int:
        return len(self.names)


@dataclass(frozen=True)
class ClassifierWeights:
    """C x d matrix of unit-norm per-class text embeddings."""

    W: np.ndarray
    vocabulary: ClassVocabulary

    def __post_init__(self):
        object.__setattr__(self, "W", np.ascontiguousarray(self.W, dtype=np.float64))
        if self.W.ndim != 2 or self.W.shape[0] != self.vocabulary.num_classes:
            raise DimensionMismatch(
                f"W shape {self.W.shape} does not match {self.vocabulary.num_classes} classes"
            )
        norms = np.linalg.norm(self.W, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-6):
            raise UnnormalizedInput("classifier rows must be unit-norm")

    @property
    def dim(self) -> int:
        return self.W.shape[1]


@dataclass(frozen=True)
class LogitMatrix:
    """t x C scores plus argmax predictions (ties to the lowest index)."""

    scores: np.ndarray
    predictions: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "scores", np.ascontiguousarray(self.scores, dtype=np.float64))
        object.__setattr__(self, "predictions", np.ascontiguousarray(self.predictions, dtype=np.int64))

    @classmethod
    def from_scores(cls, scores: np.ndarray) -> "LogitMatrix":
        scores = np.asarray(scores, dtype=np.float64)
        # np.argmax already breaks ties toward the lowest index
        return cls(scores=scores, predictions=np.argmax(scores, axis=1))


def build_classifier(
    prompt_groups: list[np.ndarray] | list[list[np.ndarray]],
    vocabulary: ClassVocabulary,
) -> ClassifierWeights:
    """Average each class's prompt embeddings, then L2-normalize the mean.

    ``prompt_groups[c]`` holds class c's prompt embeddings as an array of
    shape (k, d) or a list of length-d vectors, k >= 1.
    """
    C = vocabulary.num_classes
    if len(prompt_groups) != C:
        raise DimensionMismatch(
            f"{len(prompt_groups)} prompt groups for {C} classes"
        )
    dim = None
    rows = []
    for c, group in enumerate(prompt_groups):
        g = np.atleast_2d(np.asarray(group, dtype=np.float64))
        if g.size == 0:
            raise EmptyClass(c)
        if dim is None:
            dim = g.shape[1]
        elif g.shape[1] != dim:
            raise DimensionMismatch(
                f"class {c} prompts have dim {g.shape[1]}, expected {dim}"
            )
        mean = g.mean(axis=0)
        norm = np.linalg.norm(mean)
        if norm < 1e-6:
            raise DegenerateMean(f"class {c} mean prompt has norm {norm:.3g}")
        rows.append(mean / norm)
    return ClassifierWeights(W=np.stack(rows), vocabulary=vocabulary)


def groups_from_bank(bank: EmbeddingBank, vocabulary: ClassVocabulary) -> list[np.ndarray]:
    """Split a labeled prompt bank into per-class embedding groups."""
    if bank.labels is None:
        raise MissingLabels("prompt bank has no labels")
    C = vocabulary.num_classes
    if bank.count > 0 and int(bank.labels.max()) >= C:
        raise LabelOutOfRange(f"label {int(bank.labels.max())} >= {C}")
    groups = []
    for c in range(C):
        members = bank.data[bank.labels == c]
        if members.shape[0] == 0:
            raise EmptyClass(c)
        groups.append(members)
    return groups


def classifier_to_bank(weights: ClassifierWeights) -> EmbeddingBank:
    """Serialize classifier rows as a bank; ids carry the class names."""
    C = weights.vocabulary.num_classes
    return EmbeddingBank(
        dim=weights.dim, count=C, data=weights.W,
        labels=np.arange(C, dtype=np.uint32),
        ids=weights.vocabulary.names, normalized=True,
        meta={"kind": "classifier", "num_classes": str(C)},
    )


def classifier_from_bank(bank: EmbeddingBank) -> ClassifierWeights:
    """Rebuild classifier weights from a bank produced by classifier_to_bank."""
    if bank.ids is None:
        raise MissingLabels("classifier bank must carry class names as ids")
    if not bank.normalized:
        raise UnnormalizedInput("classifier bank must be normalized")
    return ClassifierWeights(W=bank.data, vocabulary=ClassVocabulary(bank.ids))


def zeroshot_logits(f: EmbeddingBank, W: ClassifierWeights) -> LogitMatrix:
    """Cosine logits of every test row against every classifier row."""
    if f.dim != W.dim:
        raise DimensionMismatch(f"bank dim {f.dim} != classifier dim {W.dim}")
    if not f.normalized:
        raise UnnormalizedInput("test bank must be normalized")
    return LogitMatrix.from_scores(f.data @ W.W.T)


@dataclass(frozen=True)
class GapStats:
    """Mean/variance of image-image, text-text, and image-text cosines.

    Intra-modal statistics exclude self-pairs; each unordered pair is
    counted once. Variances are population variances.
    """

    image_image: tuple[float, float]
    text_text: tuple[float, float]
    image_text: tuple[float, float]
    image_image_pairs: int
    text_text_pairs: int
    image_text_pairs: int


def _offdiag_stats(vectors: np.ndarray, side: str) -> tuple[float, float, int]:
    n = vectors.shape[0]
    if n < 2:
        raise InsufficientRows(f"{side} side has {n} rows, need at least 2")
    sims = vectors @ vectors.T
    vals = sims[np.triu_indices(n, k=1)]
    return float(vals.mean()), float(vals.var()), vals.size


def modality_gap_stats(image_bank: EmbeddingBank, W: ClassifierWeights) -> GapStats:
    """Pairwise cosine-similarity statistics within and across modalities."""
    if image_bank.dim != W.dim:
        raise DimensionMismatch(
            f"image dim {image_bank.dim} != classifier dim {W.dim}"
        )
    if not image_bank.normalized:
        raise UnnormalizedInput("image bank must be normalized")
    ii = _offdiag_stats(image_bank.data, "image-image")
    tt = _offdiag_stats(W.W, "text-text")
    cross = image_bank.data @ W.W.T
    it = (float(cross.mean()), float(cross.var()), cross.size)
    return GapStats(
        image_image=(ii[0], ii[1]),
        text_text=(tt[0], tt[1]),
        image_text=(it[0], it[1]),
        image_image_pairs=ii[2],
        text_text_pairs=tt[2],
        image_text_pairs=it[2],
    )
