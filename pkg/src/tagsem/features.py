"""Histogram features over the codebook.

Bin ``j`` of a document's feature vector counts the document's tag
occurrences whose averaged similarity to filter word ``j`` is at least ``T``.
"""

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ._io import atomic_write_text
from .corpus import TagDocument
from .embeddings import EmbeddingEnsemble, SimilarityIndex
from .errors import DataError
from .filterbank import Codebook


@dataclass(frozen=True, eq=False)
class FeatureVector:
    image_id: str
    category: str
    counts: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return (
            self.image_id == other.image_id
            and self.category == other.category
            and np.array_equal(self.counts, other.counts)
        )


class FeatureExtractor:
    """Extractor bound to one codebook and ensemble.

    Similarity rows are cached per token, so repeated extraction at
    different thresholds (threshold sweeps) pays for the similarities once.
    """

    def __init__(self, codebook: Codebook, ensemble: EmbeddingEnsemble):
        if codebook.n == 0:
            raise ValueError("codebook is empty")
        self.codebook = codebook
        self.ensemble = ensemble
        self._index = SimilarityIndex(ensemble, codebook.filter_words)
        self._rows = {}

    def similarities(self, tokens: Sequence[str]) -> np.ndarray:
        for t in tokens:
            if t not in self._rows:
                self._rows[t] = self._index.row(t)
        n = self.codebook.n
        return np.array([self._rows[t] for t in tokens]).reshape(len(tokens), n)

    def extract(self, doc: TagDocument, threshold: float) -> FeatureVector:
        if not 0.0 < threshold <= 1.0:
            raise ValueError(f"threshold must lie in (0, 1], got {threshold}")
        tokens = doc.tokens()
        sims = self.similarities(tokens)
        with np.errstate(invalid="ignore"):
            hits = sims >= threshold  # NaN (uncovered pair) never hits
        weights = np.array([doc.tags[t] for t in tokens], dtype=np.int64)
        counts = weights @ hits.astype(np.int64) if tokens else np.zeros(self.codebook.n, dtype=np.int64)
        return FeatureVector(doc.image_id, doc.category, counts)

    def extract_many(self, docs: Sequence[TagDocument], threshold: float) -> list:
        return [self.extract(d, threshold) for d in docs]


def extract(doc: TagDocument, cb: Codebook, ensemble: EmbeddingEnsemble, T: float) -> FeatureVector:
    """Histogram feature vector of one document."""
    return FeatureExtractor(cb, ensemble).extract(doc, T)


def extract_matrix(docs: Sequence[TagDocument], cb: Codebook, ensemble: EmbeddingEnsemble, T: float) -> list:
    """:func:`extract` over many documents, sharing the similarity cache."""
    return FeatureExtractor(cb, ensemble).extract_many(docs, T)


def feature_matrix(features: Sequence[FeatureVector], normalize: bool = False) -> np.ndarray:
    """Stack feature vectors into a 2-D array.

    With ``normalize=True`` every nonzero row is scaled to unit L2 norm; the
    raw counts are the default.
    """
    if not features:
        return np.zeros((0, 0))
    X = np.vstack([f.counts for f in features])
    if normalize:
        X = X.astype(np.float64)
        norms = np.linalg.norm(X, axis=1, keepdims=True)
        X = np.divide(X, norms, out=np.zeros_like(X), where=norms > 0)
    return X


def dump_features(features: Sequence[FeatureVector], n=None) -> str:
    if n is None:
        n = len(features[0].counts) if features else 0
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["image_id", "category"] + [f"f_{j}" for j in range(n)])
    for f in features:
        if len(f.counts) != n:
            raise ValueError("feature vectors have different lengths")
        writer.writerow([f.image_id, f.category] + [int(c) for c in f.counts])
    return buf.getvalue()


def save_features(features: Sequence[FeatureVector], path, n=None) -> Path:
    return atomic_write_text(path, dump_features(features, n))


def load_features(path) -> list:
    path = Path(path)
    if not path.is_file():
        raise DataError("feature file not found", path)
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:2] != ["image_id", "category"]:
            raise DataError("expected header starting with image_id,category", path, 1)
        n = len(header) - 2
        if header[2:] != [f"f_{j}" for j in range(n)]:
            raise DataError("feature columns must be f_0..f_{n-1}", path, 1)
        out = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != n + 2:
                raise DataError(f"expected {n + 2} cells, found {len(row)}", path, lineno)
            try:
                counts = np.array([int(c) for c in row[2:]], dtype=np.int64)
            except ValueError:
                raise DataError("feature cells must be integers", path, lineno) from None
            out.append(FeatureVector(row[0], row[1], counts))
    return out
