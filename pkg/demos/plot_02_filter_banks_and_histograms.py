"""
Filter banks and tag histograms
===============================

A filter bank keeps the training tags of a category that sit close to the
category name. Stacking the banks gives a codebook, and each document is then
summarised by how many of its tags land near each codebook word.
"""
import numpy as np

from tagsem import EmbeddingEnsemble, PipelineConfig, generate_synthetic, preprocess_all
from tagsem.features import FeatureExtractor, feature_matrix
from tagsem.filterbank import build_codebook, build_filter_banks

records, tables = generate_synthetic(n_categories=4, docs_per_category=30, tightness=0.6, seed=3)
docs = preprocess_all(records)
ens = EmbeddingEnsemble(tables)
config = PipelineConfig()

##############################################################################
# One bank per category
# ---------------------

categories = sorted({d.category for d in docs})
banks = build_filter_banks(docs, categories, ens, config)
for bank in banks:
    print(bank.category, len(bank.entries), bank.tags[:5])

##############################################################################
# The codebook removes duplicates across banks but remembers where each word
# came from.

codebook = build_codebook(banks)
print(codebook.n, "filter words")

##############################################################################
# Histograms
# ----------
# Lowering the threshold can only add hits, never remove them.

extractor = FeatureExtractor(codebook, ens)
for T in (0.3, 0.6, 0.9):
    X = feature_matrix(extractor.extract_many(docs, T))
    print(T, X.sum(), np.count_nonzero(X.sum(axis=1)), "non-empty documents")
