"""Accuracy, validation-set grid search, and experiment reports.

The sweep is factored: the zero-shot logits depend on nothing swept, the
intra-modal affinity only on ``beta``, and the signature/KL pathway only
on ``tau``. Each (beta, tau) block therefore precomputes its two label
attention terms once, and every (alpha, gamma) point is a cheap blend.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .adapter import (
    HyperParams,
    kl_matrix,
    rescale_psi,
    signatures,
    tip_affinity,
)
from .bank import EmbeddingBank
from .classifier import ClassifierWeights, LogitMatrix, zeroshot_logits
from .curation import SupportSet
from .errors import EmptyInput, InvalidGrid, LengthMismatch, MissingLabels
from .errors import InvalidHyperParams


@dataclass(frozen=True)
class SweepGrid:
    """Finite value lists for each swept hyperparameter."""

    alpha_values: tuple[float, ...]
    beta_values: tuple[float, ...]
    gamma_values: tuple[float, ...]
    tau_values: tuple[float, ...] = (1.0,)

    def __post_init__(self):
        for name, vals in (
            ("alpha", self.alpha_values), ("beta", self.beta_values),
            ("gamma", self.gamma_values), ("tau", self.tau_values),
        ):
            vals = tuple(float(v) for v in vals)
            object.__setattr__(self, f"{name}_values", vals)
            if not vals:
                raise InvalidGrid(f"{name} value list is empty")
            if not all(np.isfinite(vals)):
                raise InvalidGrid(f"{name} values must be finite")
        if any(v < 0 for v in self.alpha_values):
            raise InvalidGrid("alpha values must be >= 0")
        if any(v <= 0 for v in self.beta_values):
            raise InvalidGrid("beta values must be > 0")
        if any(v < 0 for v in self.gamma_values):
            raise InvalidGrid("gamma values must be >= 0")
        if any(v <= 0 for v in self.tau_values):
            raise InvalidGrid("tau values must be > 0")

    @classmethod
    def default(cls) -> "SweepGrid":
        # log spacing over the published search ranges; tau stays fixed
        return cls(
            alpha_values=tuple(np.geomspace(0.1, 50.0, 8)),
            beta_values=tuple(np.geomspace(1.0, 50.0, 8)),
            gamma_values=tuple(np.geomspace(0.1, 30.0, 8)),
            tau_values=(1.0,),
        )

    def __len__(self) -> int:
        return (len(self.alpha_values) * len(self.beta_values)
                * len(self.gamma_values) * len(self.tau_values))


@dataclass(frozen=True)
class EvalReport:
    """Outcome of one evaluation run."""

    mode: str
    hyperparams: HyperParams
    accuracy: float
    num_test: int
    support_meta: dict = field(default_factory=dict)
    elapsed_seconds: float = 0.0


def accuracy(predictions: np.ndarray, gold: np.ndarray) -> float:
    """Fraction of exact matches between two index vectors."""
    predictions = np.asarray(predictions)
    gold = np.asarray(gold)
    if predictions.shape != gold.shape:
        raise LengthMismatch(
            f"predictions length {predictions.shape} != gold {gold.shape}"
        )
    if predictions.size == 0:
        raise EmptyInput("cannot score zero predictions")
    return float(np.mean(predictions == gold))


def _gold_labels(bank: EmbeddingBank, gold) -> np.ndarray:
    if gold is not None:
        return np.asarray(gold, dtype=np.int64)
    if bank.labels is None:
        raise MissingLabels("bank is unlabeled and no gold labels were given")
    return bank.labels.astype(np.int64)


def grid_sweep(
    val_f: EmbeddingBank,
    val_gold,
    W: ClassifierWeights,
    support: SupportSet,
    grid: SweepGrid,
) -> tuple[HyperParams, float, list[dict]]:
    """Evaluate TIP-X accuracy at every grid point; return the maximizer.

    Ties go to the earliest point in row-major iteration order (alpha
    outermost, then beta, gamma, tau innermost). The returned table has
    one row per grid point in that same order.
    """
    gold = _gold_labels(val_f, val_gold)
    zsl = zeroshot_logits(val_f, W).scores
    L = support.one_hot

    # blend terms for each (beta, tau) block, computed once
    al_terms: dict[int, np.ndarray] = {}
    psi_terms: dict[tuple[int, int], np.ndarray] = {}
    sig_cache: dict[int, np.ndarray] = {}
    A_cache: dict[int, np.ndarray] = {}
    for ib, beta in enumerate(grid.beta_values):
        A_cache[ib] = tip_affinity(val_f.data, support.F, beta)
        al_terms[ib] = A_cache[ib] @ L
    for it, tau in enumerate(grid.tau_values):
        s = signatures(val_f.data, W, tau)
        S = signatures(support.F, W, tau)
        sig_cache[it] = kl_matrix(s, S)
    for ib in range(len(grid.beta_values)):
        for it in range(len(grid.tau_values)):
            psi_terms[(ib, it)] = rescale_psi(-sig_cache[it], A_cache[ib]) @ L

    table: list[dict] = []
    best_acc = -1.0
    best: HyperParams | None = None
    for alpha in grid.alpha_values:
        for ib, beta in enumerate(grid.beta_values):
            for gamma in grid.gamma_values:
                for it, tau in enumerate(grid.tau_values):
                    scores = alpha * al_terms[ib] + zsl + gamma * psi_terms[(ib, it)]
                    acc = accuracy(np.argmax(scores, axis=1), gold)
                    table.append({
                        "alpha": alpha, "beta": beta, "gamma": gamma,
                        "tau": tau, "val_accuracy": acc,
                    })
                    if acc > best_acc:
                        best_acc = acc
                        best = HyperParams(alpha=alpha, beta=beta,
                                           gamma=gamma, tau=tau)
    assert best is not None
    return best, best_acc, table


def tipx_scores(
    f: EmbeddingBank,
    W: ClassifierWeights,
    support: SupportSet,
    hp: HyperParams,
) -> LogitMatrix:
    """Full three-term pipeline for one hyperparameter setting."""
    zsl = zeroshot_logits(f, W).scores
    A = tip_affinity(f.data, support.F, hp.beta)
    s = signatures(f.data, W, hp.tau)
    S = signatures(support.F, W, hp.tau)
    M = kl_matrix(s, S, hp.epsilon)
    L = support.one_hot
    scores = hp.alpha * (A @ L) + zsl + hp.gamma * (rescale_psi(-M, A) @ L)
    return LogitMatrix.from_scores(scores)


def evaluate(
    test_f: EmbeddingBank,
    test_gold,
    W: ClassifierWeights,
    support: SupportSet | None,
    hp: HyperParams,
    mode: str = "tipx",
) -> EvalReport:
    """Score one mode at fixed hyperparameters.

    ``zero-shot`` ignores the support set and all blend weights.
    """
    start = time.perf_counter()
    gold = _gold_labels(test_f, test_gold)
    if mode in ("zs", "zero-shot"):
        logits = zeroshot_logits(test_f, W)
        mode_name = "zero-shot"
    elif mode == "tip":
        if support is None:
            raise EmptyInput("tip mode requires a support set")
        zsl = zeroshot_logits(test_f, W).scores
        A = tip_affinity(test_f.data, support.F, hp.beta)
        logits = LogitMatrix.from_scores(hp.alpha * (A @ support.one_hot) + zsl)
        mode_name = "tip"
    elif mode == "tipx":
        if support is None:
            raise EmptyInput("tipx mode requires a support set")
        logits = tipx_scores(test_f, W, support, hp)
        mode_name = "tipx"
    else:
        raise InvalidHyperParams(f"unknown mode {mode!r}")
    acc = accuracy(logits.predictions, gold)
    return EvalReport(
        mode=mode_name, hyperparams=hp, accuracy=acc,
        num_test=test_f.count,
        support_meta=dict(support.meta or {}) if support is not None else {},
        elapsed_seconds=time.perf_counter() - start,
    )
