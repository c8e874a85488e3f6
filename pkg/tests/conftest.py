from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from susx import ClassVocabulary, ClassifierWeights, EmbeddingBank

from oracles import random_unit_rows


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_bank(data, labels=None, ids=None, normalized=False, meta=None):
    data = np.asarray(data, dtype=np.float64)
    return EmbeddingBank(
        dim=data.shape[1], count=data.shape[0], data=data,
        labels=None if labels is None else np.asarray(labels, dtype=np.uint32),
        ids=ids, normalized=normalized, meta=meta or {},
    )


def unit_bank(rng, n, d, **kw):
    return make_bank(random_unit_rows(rng, n, d), normalized=True, **kw)


def random_classifier(rng, C, d):
    vocab = ClassVocabulary(tuple(f"class_{i}" for i in range(C)))
    return ClassifierWeights(W=random_unit_rows(rng, C, d), vocabulary=vocab)
