"""Seeded synthetic tag corpora with matching embedding tables.

Each category owns a vocabulary of made-up words whose vectors sit in a cone
around a category centroid (cosine to the centroid at least ``tightness``);
the category label itself is placed on the centroid. Noise words are
orthogonal to every centroid. Every table is drawn independently, so tables
agree on which words belong together but not on coordinates. Tables listed
in ``random_tables`` carry no signal at all.
"""

from dataclasses import dataclass

import numpy as np

from .corpus import RawTagRecord
from .embeddings import EmbeddingTable

_ONSETS = "b c d f g h j k l m n p r s t v w z br ch cl dr fl gr pl sh st tr".split()
_VOWELS = "a e i o u ai ea io ou".split()


@dataclass(frozen=True)
class SyntheticParams:
    n_categories: int = 8
    docs_per_category: int = 130
    vocab_per_category: int = 20
    dim: int = 50
    tightness: float = 0.9
    noise_rate: float = 0.1
    seed: int = 0
    tags_per_doc: int = 60
    noise_vocab: int = 60
    n_tables: int = 3
    random_tables: tuple = ()
    oov_rate: float = 0.0
    junk_rate: float = 0.02
    zipf: float = 1.0

    def __post_init__(self):
        for name in ("n_categories", "docs_per_category", "vocab_per_category", "dim",
                     "tags_per_doc", "noise_vocab", "n_tables"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.tightness < 1.0:
            raise ValueError(f"tightness must lie in (0, 1), got {self.tightness}")
        if not 0.0 <= self.noise_rate < 1.0:
            raise ValueError(f"noise_rate must lie in [0, 1), got {self.noise_rate}")
        if not 0.0 <= self.oov_rate < 1.0 or not 0.0 <= self.junk_rate < 1.0:
            raise ValueError("oov_rate and junk_rate must lie in [0, 1)")
        if self.dim <= self.n_categories:
            raise ValueError("dim must exceed n_categories so centroids and noise directions fit")
        if any(not 0 <= k < self.n_tables for k in self.random_tables):
            raise ValueError("random_tables holds table indices")


def _make_words(rng, count):
    words, seen = [], set()
    while len(words) < count:
        n_syl = int(rng.integers(2, 5))
        w = "".join(_ONSETS[rng.integers(len(_ONSETS))] + _VOWELS[rng.integers(len(_VOWELS))]
                    for _ in range(n_syl))
        if w not in seen:
            seen.add(w)
            words.append(w)
    return words


def _unit(v):
    return v / np.linalg.norm(v)


def _orthogonal_unit(rng, basis, dim):
    """Random unit vector orthogonal to the orthonormal rows of ``basis``."""
    while True:
        v = rng.standard_normal(dim)
        v -= basis.T @ (basis @ v)
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            return v / norm


def _clustered_table(rng, name, p, labels, vocabs, noise_words):
    q, _ = np.linalg.qr(rng.standard_normal((p.dim, p.n_categories)))
    centroids = q.T  # orthonormal rows
    entries = {}
    for c, label in enumerate(labels):
        entries[label] = centroids[c]
        for word in vocabs[c][1:]:
            t = rng.uniform(p.tightness, 1.0)
            u = _orthogonal_unit(rng, centroids[c:c + 1], p.dim)
            entries[word] = t * centroids[c] + np.sqrt(1.0 - t * t) * u
    for word in noise_words:
        entries[word] = _orthogonal_unit(rng, centroids, p.dim)
    return entries


def _random_table(rng, p, words):
    return {w: _unit(rng.standard_normal(p.dim)) for w in words}


def generate_synthetic(params: SyntheticParams = None, **overrides):
    """Build ``(records, tables)`` for a synthetic corpus.

    Either pass a :class:`SyntheticParams` or keyword overrides of its
    defaults. The output depends only on the parameters, seed included.
    """
    p = params if params is not None else SyntheticParams()
    if overrides:
        p = SyntheticParams(**{**p.__dict__, **overrides})
    rng = np.random.default_rng(p.seed)

    words = _make_words(rng, p.n_categories * p.vocab_per_category + p.noise_vocab)
    vocabs = [words[c * p.vocab_per_category:(c + 1) * p.vocab_per_category] for c in range(p.n_categories)]
    labels = [v[0] for v in vocabs]
    noise_words = words[p.n_categories * p.vocab_per_category:]

    tables = []
    for k in range(p.n_tables):
        name = f"emb{chr(ord('a') + k)}"
        if k in p.random_tables:
            entries = _random_table(rng, p, words)
        else:
            entries = _clustered_table(rng, name, p, labels, vocabs, noise_words)
        if p.oov_rate:
            entries = {w: v for w, v in entries.items() if w in labels or rng.random() >= p.oov_rate}
        tables.append(EmbeddingTable.from_dict(name, entries))

    ranks = np.arange(1, p.vocab_per_category + 1, dtype=np.float64)
    word_weights = ranks ** -p.zipf
    word_weights /= word_weights.sum()
    records = []
    for c, label in enumerate(labels):
        for d in range(p.docs_per_category):
            own = rng.choice(p.vocab_per_category, size=p.tags_per_doc, p=word_weights)
            noisy = rng.random(p.tags_per_doc) < p.noise_rate
            noise = rng.integers(len(noise_words), size=p.tags_per_doc)
            tags = [noise_words[z] if is_noise else vocabs[c][w] for w, is_noise, z in zip(own, noisy, noise)]
            tags = [_decorate(rng, t, p.junk_rate) for t in tags]
            records.append(RawTagRecord(f"{label}_{d:04d}", label, tuple(tags), 50))
    return records, tables


def _decorate(rng, tag, junk_rate):
    """Occasionally dress a clean tag the way scraped annotations look."""
    if rng.random() >= junk_rate:
        return tag
    style = int(rng.integers(3))
    if style == 0:
        return tag.capitalize() + "!"
    if style == 1:
        return f"{tag} {int(rng.integers(1990, 2030))}"
    return f"#{tag.upper()},"
