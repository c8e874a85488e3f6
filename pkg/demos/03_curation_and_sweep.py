"""Support-set curation and hyperparameter search, end to end.

Retrieves a support set from an unlabeled candidate pool by cosine
ranking against the classifier, measures its diversity, sweeps the
blend weights on a validation split, and reports test accuracy at the
selected point.
"""
import numpy as np

from susx import (
    ClassVocabulary,
    ClassifierWeights,
    EmbeddingBank,
    HyperParams,
    SweepGrid,
    diversity,
    evaluate,
    grid_sweep,
    retrieve_support,
    sample_few_shot,
)

rng = np.random.default_rng(21)
C, d = 8, 48


def unit(X):
    return X / np.linalg.norm(X, axis=-1, keepdims=True)


def bank(data, labels=None):
    return EmbeddingBank(dim=d, count=data.shape[0], data=data,
                         labels=None if labels is None else labels.astype(np.uint32),
                         normalized=True)


means = unit(rng.standard_normal((C, d)))
W = ClassifierWeights(W=unit(means + 0.8 * rng.standard_normal((C, d))),
                      vocabulary=ClassVocabulary(tuple(f"c{i}" for i in range(C))))

# an unlabeled candidate pool: mostly cluster samples plus noise rows
pool_labels = rng.integers(0, C, 600)
pool = unit(np.vstack([
    means[pool_labels] + 0.35 * rng.standard_normal((600, d)),
    rng.standard_normal((200, d)),
]))
candidates = bank(pool)

support = retrieve_support(candidates, W, n_per_class=12)
print(f"retrieved support: {support.m} rows, diversity {diversity(support):.3f}")

val_labels = np.repeat(np.arange(C), 15)
val = bank(unit(means[val_labels] + 0.35 * rng.standard_normal((val_labels.size, d))), val_labels)
test_labels = np.repeat(np.arange(C), 40)
test = bank(unit(means[test_labels] + 0.35 * rng.standard_normal((test_labels.size, d))), test_labels)

best, best_val, table = grid_sweep(val, None, W, support, SweepGrid.default())
print(f"swept {len(table)} points; best alpha={best.alpha:.2f} "
      f"beta={best.beta:.2f} gamma={best.gamma:.2f} (val acc {best_val:.3f})")

zs = evaluate(test, None, W, None, HyperParams(), mode="zs")
tx = evaluate(test, None, W, support, best, mode="tipx")
print(f"test accuracy: zero-shot {zs.accuracy:.3f} -> adapted {tx.accuracy:.3f}")

# the same machinery supports true few-shot banks: sample K rows per class
few = sample_few_shot(val, k=3, seed=0)
tx_few = evaluate(test, None, W, few, best, mode="tipx")
print(f"3-shot from validation bank: {tx_few.accuracy:.3f}")
