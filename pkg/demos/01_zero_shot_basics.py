"""Zero-shot classification over a synthetic embedding bank.

Builds a toy 5-class problem in 32 dimensions, averages a few "prompt"
embeddings per class into a classifier, and scores a test bank against
it. No real encoder is involved; everything here is geometry.
"""
import numpy as np

from susx import (
    ClassVocabulary,
    EmbeddingBank,
    build_classifier,
    l2_normalize,
    modality_gap_stats,
    zeroshot_logits,
)

rng = np.random.default_rng(0)
C, d = 5, 32

# class directions and a handful of noisy "prompt" embeddings per class
means = rng.standard_normal((C, d))
means /= np.linalg.norm(means, axis=1, keepdims=True)
prompt_groups = [means[c] + 0.15 * rng.standard_normal((7, d)) for c in range(C)]

vocab = ClassVocabulary(tuple(f"class-{c}" for c in range(C)))
W = build_classifier(prompt_groups, vocab)
print("classifier rows:", W.W.shape)

# test images: noisy samples around the class directions
labels = rng.integers(0, C, 200)
test = EmbeddingBank(
    dim=d, count=200,
    data=means[labels] + 0.4 * rng.standard_normal((200, d)),
    labels=labels.astype(np.uint32),
)
test = l2_normalize(test)

logits = zeroshot_logits(test, W)
acc = np.mean(logits.predictions == labels)
print(f"zero-shot accuracy: {acc:.3f}")

gap = modality_gap_stats(test, W)
print(f"image-image cosine mean {gap.image_image[0]:+.3f}  "
      f"text-text {gap.text_text[0]:+.3f}  image-text {gap.image_text[0]:+.3f}")
