"""Training-free adaptation of contrastive image-text classifiers.

The library operates purely on precomputed embedding banks: it builds
text classifiers from prompt embeddings, computes zero-shot logits,
blends in support-set evidence through intra-modal and inter-modal
affinity pathways, curates support sets by retrieval or sampling, and
sweeps the blend hyperparameters on validation data.
"""
from .adapter import (
    HyperParams,
    kl_matrix,
    rescale_psi,
    row_softmax,
    signatures,
    tip_affinity,
    tip_logits,
    tipx_logits,
)
from .bank import EmbeddingBank, l2_normalize, load_bank, save_bank
from .classifier import (
    ClassifierWeights,
    ClassVocabulary,
    GapStats,
    LogitMatrix,
    build_classifier,
    classifier_from_bank,
    classifier_to_bank,
    groups_from_bank,
    modality_gap_stats,
    zeroshot_logits,
)
from .curation import (
    SupportSet,
    diversity,
    ingest_support,
    retrieve_support,
    sample_few_shot,
)
from .harness import (
    EvalReport,
    SweepGrid,
    accuracy,
    evaluate,
    grid_sweep,
    tipx_scores,
)

__all__ = [
    "EmbeddingBank", "load_bank", "save_bank", "l2_normalize",
    "ClassVocabulary", "ClassifierWeights", "LogitMatrix", "GapStats",
    "build_classifier", "groups_from_bank", "zeroshot_logits",
    "modality_gap_stats", "classifier_to_bank", "classifier_from_bank",
    "HyperParams", "row_softmax", "tip_affinity", "tip_logits",
    "signatures", "kl_matrix", "rescale_psi", "tipx_logits",
    "SupportSet", "retrieve_support", "ingest_support",
    "sample_few_shot", "diversity",
    "SweepGrid", "EvalReport", "accuracy", "grid_sweep", "evaluate",
    "tipx_scores",
]

__version__ = "0.1.0"
