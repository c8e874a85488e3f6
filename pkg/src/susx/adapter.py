"""Training-free adaptation over a cached support set.

Two affinity pathways feed the final logits:

* intra-modal: exponentiated cosine between test and support features,
  sharpened by ``beta`` and blended in with ``alpha``;
* inter-modal: each row is first projected to a "signature", a softmax
  distribution over classes of its similarities to the text classifier;
  test/support signatures are compared by KL divergence, negated so low
  divergence means high weight, rescaled to the intra-modal affinity
  range, and blended in with ``gamma``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classifier import ClassifierWeights, LogitMatrix
from .errors import (
    DimensionMismatch,
    InvalidHyperParams,
    NonFiniteValue,
    NotStochastic,
)


@dataclass(frozen=True)
class HyperParams:
    """Blend weights and temperatures for the adaptation pathways."""

    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    tau: float = 1.0
    epsilon: float = 1e-12

    def __post_init__(self):
        if self.alpha < 0:
            raise InvalidHyperParams(f"alpha must be >= 0, got {self.alpha}")
        if self.beta <= 0:
            raise InvalidHyperParams(f"beta must be > 0, got {self.beta}")
        if self.gamma < 0:
            raise InvalidHyperParams(f"gamma must be >= 0, got {self.gamma}")
        if self.tau <= 0:
            raise InvalidHyperParams(f"tau must be > 0, got {self.tau}")
        if self.epsilon <= 0:
            raise InvalidHyperParams(f"epsilon must be > 0, got {self.epsilon}")


def row_softmax(X: np.ndarray, tau: float = 1.0) -> np.ndarray:
    """Row-wise softmax of ``X / tau`` with max-subtraction for stability."""
    X = np.asarray(X, dtype=np.float64)
    if tau <= 0:
        raise InvalidHyperParams(f"tau must be > 0, got {tau}")
    if not np.all(np.isfinite(X)):
        raise NonFiniteValue("softmax input contains NaN or infinity")
    Z = X / tau
    Z = Z - Z.max(axis=1, keepdims=True)
    E = np.exp(Z)
    out = E / E.sum(axis=1, keepdims=True)
    # exp underflows to exact 0 for very large logit gaps; keep the
    # strict-positivity contract with the smallest positive float
    return np.maximum(out, np.nextafter(0.0, 1.0))


def tip_affinity(f: np.ndarray, F: np.ndarray, beta: float) -> np.ndarray:
    """exp(-beta * (1 - cosine)) between test rows and support rows."""
    f = np.asarray(f, dtype=np.float64)
    F = np.asarray(F, dtype=np.float64)
    if f.shape[1] != F.shape[1]:
        raise DimensionMismatch(f"dims {f.shape[1]} vs {F.shape[1]}")
    return np.exp(-beta * (1.0 - f @ F.T))


def tip_logits(zsl: np.ndarray, A: np.ndarray, L: np.ndarray, alpha: float) -> LogitMatrix:
    """Blend support attention over one-hot labels into the zero-shot logits."""
    zsl = np.asarray(zsl, dtype=np.float64)
    A = np.asarray(A, dtype=np.float64)
    L = np.asarray(L, dtype=np.float64)
    _check_blend_shapes(zsl, A, L)
    return LogitMatrix.from_scores(alpha * (A @ L) + zsl)


def signatures(X: np.ndarray, W: ClassifierWeights, tau: float = 1.0) -> np.ndarray:
    """Softmax distribution over classes of each row's cosines to W."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape[1] != W.dim:
        raise DimensionMismatch(f"rows have dim {X.shape[1]}, classifier {W.dim}")
    return row_softmax(X @ W.W.T, tau)


def kl_matrix(s: np.ndarray, S: np.ndarray, epsilon: float = 1e-12) -> np.ndarray:
    """M[i, j] = KL(s_i || S_j), smoothed by epsilon in both arguments.

    Inputs are row-stochastic matrices with a shared column count.
    """
    s = np.asarray(s, dtype=np.float64)
    S = np.asarray(S, dtype=np.float64)
    if s.shape[1] != S.shape[1]:
        raise DimensionMismatch(f"column counts {s.shape[1]} vs {S.shape[1]}")
    for name, P in (("first", s), ("second", S)):
        if np.any(P < 0):
            raise NotStochastic(f"{name} input has negative entries")
        if np.any(np.abs(P.sum(axis=1) - 1.0) > 1e-6):
            raise NotStochastic(f"{name} input rows do not sum to 1")
    # sum_c s_ic * ln(s_ic + eps)  -  sum_c s_ic * ln(S_jc + eps)
    self_term = np.sum(s * np.log(s + epsilon), axis=1)
    cross = s @ np.log(S + epsilon).T
    return self_term[:, None] - cross


def rescale_psi(X: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Affinely map X so its global min/max match the reference's.

    A constant X maps to the constant midpoint of the reference range.
    """
    X = np.asarray(X, dtype=np.float64)
    reference = np.asarray(reference, dtype=np.float64)
    if X.shape != reference.shape:
        raise DimensionMismatch(f"shapes {X.shape} vs {reference.shape}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(reference))):
        raise NonFiniteValue("rescale inputs must be finite")
    lo, hi = X.min(), X.max()
    rlo, rhi = reference.min(), reference.max()
    if hi == lo:
        return np.full_like(X, (rlo + rhi) / 2.0)
    return (X - lo) * ((rhi - rlo) / (hi - lo)) + rlo


def tipx_logits(
    zsl: np.ndarray,
    A: np.ndarray,
    M: np.ndarray,
    L: np.ndarray,
    alpha: float,
    gamma: float,
) -> LogitMatrix:
    """Three-term blend: zero-shot + alpha * A L + gamma * psi(-M) L.

    The KL matrix is negated before rescaling, and psi's reference range
    is A. With gamma=0 this reduces exactly to :func:`tip_logits`; with
    alpha=gamma=0 it reduces exactly to the zero-shot logits.
    """
    zsl = np.asarray(zsl, dtype=np.float64)
    A = np.asarray(A, dtype=np.float64)
    M = np.asarray(M, dtype=np.float64)
    L = np.asarray(L, dtype=np.float64)
    _check_blend_shapes(zsl, A, L)
    if M.shape != A.shape:
        raise DimensionMismatch(f"KL matrix shape {M.shape} != affinity {A.shape}")
    scores = alpha * (A @ L) + zsl + gamma * (rescale_psi(-M, A) @ L)
    return LogitMatrix.from_scores(scores)


def _check_blend_shapes(zsl: np.ndarray, A: np.ndarray, L: np.ndarray) -> None:
    t, C = zsl.shape
    if A.shape[0] != t:
        raise DimensionMismatch(f"affinity rows {A.shape[0]} != test rows {t}")
    if L.shape != (A.shape[1], C):
        raise DimensionMismatch(
            f"one-hot shape {L.shape} incompatible with affinity {A.shape} and {C} classes"
        )
