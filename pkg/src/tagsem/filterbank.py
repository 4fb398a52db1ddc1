"""Per-category filter banks and the codebook of filter words.

A filter bank keeps the training tags of one category whose averaged
similarity to the category label reaches ``delta``. Concatenating the banks
(in category order, dropping repeats) gives the codebook whose words are the
axes of the histogram features.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from ._io import atomic_write_text
from .corpus import TagDocument
from .embeddings import EmbeddingEnsemble, averaged_similarity
from .errors import DataError, InfeasibleError

CODEBOOK_VERSION = 1


@dataclass(frozen=True)
class PipelineConfig:
    """Thresholds and SVM settings; defaults are the published ones."""

    delta: float = 0.50
    t_threshold: float = 0.40
    top_n: int = 500
    gamma: float = 1e-5
    c_penalty: float = 50.0

    def __post_init__(self):
        if not 0.0 < self.delta <= 1.0:
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}")
        if not 0.0 < self.t_threshold <= 1.0:
            raise ValueError(f"t_threshold must lie in (0, 1], got {self.t_threshold}")
        if isinstance(self.top_n, bool) or not isinstance(self.top_n, int) or self.top_n < 1:
            raise ValueError(f"top_n must be a positive integer, got {self.top_n}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not self.c_penalty > 0:
            raise ValueError(f"c_penalty must be positive, got {self.c_penalty}")


@dataclass(frozen=True)
class FilterBank:
    category: str
    entries: tuple  # ((tag, score), ...) by descending score, then tag
    delta: float = 0.50

    @property
    def tags(self) -> list:
        return [tag for tag, _ in self.entries]

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class Codebook:
    filter_words: tuple
    provenance: dict  # word -> frozenset of categories
    delta: float
    banks: tuple = ()

    @property
    def n(self) -> int:
        return len(self.filter_words)

    @property
    def categories(self) -> list:
        return [b.category for b in self.banks]

    def index(self) -> dict:
        return {w: j for j, w in enumerate(self.filter_words)}


def candidate_tags(doc: TagDocument, top_n: int) -> list:
    """The ``top_n`` most frequent tags of a document, ties in lexicographic order."""
    if top_n < 1:
        raise ValueError("top_n must be at least 1")
    ranked = sorted(doc.tags.items(), key=lambda kv: (-kv[1], kv[0]))
    return [tag for tag, _ in ranked[:top_n]]


def build_filter_bank(
    category: str,
    training_docs: Sequence[TagDocument],
    ensemble: EmbeddingEnsemble,
    config: PipelineConfig,
) -> FilterBank:
    """Filter bank of one category from its training documents.

    Parameters
    ----------
    category : str
        Category label; it is embedded like any other phrase, so multi-word
        labels such as ``"airport inside"`` work.
    training_docs : sequence of TagDocument
        Training documents of this category only.
    ensemble : EmbeddingEnsemble
    config : PipelineConfig
        ``top_n`` caps the candidates taken from each document and ``delta``
        is the inclusive acceptance threshold.

    Raises
    ------
    InfeasibleError
        If no table can embed the category label.
    """
    if not ensemble.covers(category):
        raise InfeasibleError(f"category {category!r} is out of vocabulary in every embedding table")
    strays = sorted({d.category for d in training_docs if d.category != category})
    if strays:
        raise ValueError(f"training documents of other categories given for {category!r}: {strays}")
    candidates = set()
    for doc in training_docs:
        candidates.update(candidate_tags(doc, config.top_n))
    entries = []
    for tag in sorted(candidates):
        score = averaged_similarity(ensemble, tag, category)
        if score is not None and score >= config.delta:
            entries.append((tag, score))
    entries.sort(key=lambda e: (-e[1], e[0]))
    return FilterBank(category, tuple(entries), config.delta)


def build_filter_banks(docs, categories, ensemble, config) -> list:
    """One bank per category, from the documents labelled with it."""
    by_cat = {c: [] for c in categories}
    for d in docs:
        if d.category in by_cat:
            by_cat[d.category].append(d)
    return [build_filter_bank(c, by_cat[c], ensemble, config) for c in categories]


def build_codebook(banks: Sequence[FilterBank]) -> Codebook:
    if not banks:
        raise ValueError("at least one filter bank is required")
    deltas = {b.delta for b in banks}
    if len(deltas) != 1:
        raise ValueError(f"filter banks were built with different delta values: {sorted(deltas)}")
    cats = [b.category for b in banks]
    if len(set(cats)) != len(cats):
        raise ValueError("each category may contribute only one bank")
    words, provenance = [], {}
    for bank in banks:
        for tag, _ in bank.entries:
            if tag not in provenance:
                words.append(tag)
                provenance[tag] = set()
            provenance[tag].add(bank.category)
    return Codebook(
        tuple(words),
        {w: frozenset(c) for w, c in provenance.items()},
        deltas.pop(),
        tuple(banks),
    )


def dump_codebook(cb: Codebook) -> str:
    obj = {
        "version": CODEBOOK_VERSION,
        "delta": cb.delta,
        "categories": cb.categories,
        "banks": {b.category: [[tag, score] for tag, score in b.entries] for b in cb.banks},
        "filter_words": list(cb.filter_words),
    }
    return json.dumps(obj, ensure_ascii=False, indent=1) + "\n"


def save_codebook(cb: Codebook, path) -> Path:
    return atomic_write_text(path, dump_codebook(cb))


def load_codebook(path) -> Codebook:
    """Read a codebook file and re-check all of its invariants."""
    path = Path(path)
    if not path.is_file():
        raise DataError("codebook file not found", path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"malformed codebook ({exc.msg})", path, exc.lineno) from None
    if not isinstance(obj, dict):
        raise DataError("codebook must be a JSON object", path)
    if obj.get("version") != CODEBOOK_VERSION:
        raise DataError(f"unsupported codebook version {obj.get('version')!r}", path)
    try:
        delta = float(obj["delta"])
        categories = list(obj["categories"])
        raw_banks = obj["banks"]
        words = list(obj["filter_words"])
        banks = []
        for cat in categories:
            entries = tuple((str(tag), float(score)) for tag, score in raw_banks[cat])
            banks.append(FilterBank(cat, entries, delta))
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"malformed codebook ({exc!r})", path) from None
    if len(set(words)) != len(words):
        dup = next(w for w in words if words.count(w) > 1)
        raise DataError(f"duplicate filter word {dup!r}", path)
    for bank in banks:
        if len({t for t, _ in bank.entries}) != len(bank.entries):
            raise DataError(f"duplicate tag in bank {bank.category!r}", path)
        if any(score < delta for _, score in bank.entries):
            raise DataError(f"bank {bank.category!r} has an entry below delta", path)
    try:
        cb = build_codebook(banks)
    except ValueError as exc:
        raise DataError(str(exc), path) from None
    if list(cb.filter_words) != words:
        raise DataError("filter_words do not match the concatenated banks", path)
    return cb
