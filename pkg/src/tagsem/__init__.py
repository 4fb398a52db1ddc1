"""Tag-based semantic features for scene image classification.

Images are represented by the annotation tags of visually similar web
images. Training tags close to each category label (averaged word-embedding
similarity) form per-category filter banks; their union is a codebook, and a
document's feature vector counts the tags that match each codebook word.
An RBF-kernel SVM classifies the resulting histograms.
"""

from .corpus import RawTagRecord, TagDocument, load_corpus, preprocess, preprocess_all, tokenize
from .embeddings import (
    EmbeddingEnsemble,
    EmbeddingTable,
    averaged_similarity,
    cosine,
    load_table,
    phrase_vector,
)
from .errors import DataError, InfeasibleError, TagsemError
from .features import FeatureVector, extract, extract_matrix, feature_matrix
from .filterbank import (
    Codebook,
    FilterBank,
    PipelineConfig,
    build_codebook,
    build_filter_bank,
    candidate_tags,
    load_codebook,
    save_codebook,
)
from .classifier import SvmModel, predict, rbf, train
from .evaluation import ablate_embeddings, ablate_threshold, evaluate, make_splits
from .synthetic import SyntheticParams, generate_synthetic

__all__ = [
    "Codebook",
    "DataError",
    "EmbeddingEnsemble",
    "EmbeddingTable",
    "FeatureVector",
    "FilterBank",
    "InfeasibleError",
    "PipelineConfig",
    "RawTagRecord",
    "SvmModel",
    "SyntheticParams",
    "TagDocument",
    "TagsemError",
    "ablate_embeddings",
    "ablate_threshold",
    "averaged_similarity",
    "build_codebook",
    "build_filter_bank",
    "candidate_tags",
    "cosine",
    "evaluate",
    "extract",
    "extract_matrix",
    "feature_matrix",
    "generate_synthetic",
    "load_codebook",
    "load_corpus",
    "load_table",
    "make_splits",
    "phrase_vector",
    "predict",
    "preprocess",
    "preprocess_all",
    "rbf",
    "save_codebook",
    "tokenize",
    "train",
]

__version__ = "0.1.0"
