"""Word-embedding tables and averaged cosine similarity.

Several pre-trained tables (word2vec, GloVe, fastText, ...) are combined into
an :class:`EmbeddingEnsemble`. The similarity of two words or phrases is the
cosine similarity in each table that knows both of them, averaged over those
tables; a pair unknown to every table has no similarity (``None``).
"""

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ._io import atomic_write_text
from .corpus import tokenize
from .errors import DataError


@dataclass(frozen=True, eq=False)
class EmbeddingTable:
    """Token -> vector lookup backed by one dense ``(n_tokens, dim)`` array."""

    name: str
    vocab: dict
    vectors: np.ndarray

    def __post_init__(self):
        vectors = np.array(self.vectors, dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[1] < 1:
            raise ValueError("vectors must be a 2-D array with at least one column")
        if vectors.shape[0] != len(self.vocab):
            raise ValueError("vocab size and number of vectors differ")
        if sorted(self.vocab.values()) != list(range(len(self.vocab))):
            raise ValueError("vocab indices must be 0..n-1")
        if not np.all(np.isfinite(vectors)):
            raise ValueError("vectors must be finite")
        zero = np.flatnonzero(~vectors.any(axis=1))
        if zero.size:
            token = next(t for t, i in self.vocab.items() if i == zero[0])
            raise ValueError(f"zero vector for token {token!r}")
        vectors.setflags(write=False)
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "vocab", dict(self.vocab))

    @classmethod
    def from_dict(cls, name: str, entries: dict) -> "EmbeddingTable":
        tokens = list(entries)
        vectors = np.array([np.asarray(entries[t], dtype=np.float64) for t in tokens])
        if not tokens:
            raise ValueError("an embedding table needs at least one entry")
        return cls(name, {t: i for i, t in enumerate(tokens)}, vectors)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self):
        return len(self.vocab)

    def __contains__(self, token):
        return token in self.vocab

    def __getitem__(self, token) -> np.ndarray:
        return self.vectors[self.vocab[token]]

    def tokens(self) -> list:
        return sorted(self.vocab, key=self.vocab.__getitem__)


def load_table(path, name: Optional[str] = None) -> EmbeddingTable:
    """Read a word2vec/GloVe style text file.

    Each line is a token followed by ``dim`` floats. An optional first line
    ``"<vocab_size> <dim>"`` is accepted and checked against the body.
    """
    path = Path(path)
    if name is None:
        name = path.stem
    if not path.is_file():
        raise DataError("embedding file not found", path)
    vocab, rows = {}, []
    dim = header_size = None
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2 and all(p.isdigit() for p in parts):
                header_size, dim = int(parts[0]), int(parts[1])
                if dim < 1:
                    raise DataError("header dimension must be positive", path, lineno)
                continue
            token, values = parts[0], parts[1:]
            if dim is None:
                dim = len(values)
                if dim < 1:
                    raise DataError(f"no vector components for token {token!r}", path, lineno)
            if len(values) != dim:
                raise DataError(f"expected {dim} components, found {len(values)}", path, lineno)
            try:
                vec = [float(v) for v in values]
            except ValueError:
                raise DataError(f"non-numeric component for token {token!r}", path, lineno) from None
            if not all(math.isfinite(v) for v in vec):
                raise DataError(f"non-finite component for token {token!r}", path, lineno)
            if not any(vec):
                raise DataError(f"zero vector for token {token!r}", path, lineno)
            if token in vocab:
                raise DataError(f"duplicate token {token!r}", path, lineno)
            vocab[token] = len(rows)
            rows.append(vec)
    if not rows:
        raise DataError("embedding file has no vectors", path)
    if header_size is not None and header_size != len(rows):
        raise DataError(f"header announces {header_size} vectors, found {len(rows)}", path)
    return EmbeddingTable(name, vocab, np.array(rows, dtype=np.float64))


def dump_table(table: EmbeddingTable, header: bool = True) -> str:
    lines = [f"{len(table)} {table.dim}"] if header else []
    for token in table.tokens():
        lines.append(token + " " + " ".join(repr(float(v)) for v in table[token]))
    return "".join(line + "\n" for line in lines)


def save_table(table: EmbeddingTable, path, header: bool = True) -> Path:
    return atomic_write_text(path, dump_table(table, header))


def cosine(a, b) -> float:
    """Cosine similarity of two nonzero vectors, clamped to [-1, 1]."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"cosine needs two 1-D vectors of equal length, got {a.shape} and {b.shape}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine is undefined for a zero vector")
    return float(min(1.0, max(-1.0, np.dot(a, b) / (na * nb))))


def phrase_vector(table: EmbeddingTable, phrase: str) -> Optional[np.ndarray]:
    """Mean vector of the in-vocabulary tokens of ``phrase``, or ``None``."""
    known = [table[t] for t in tokenize(phrase) if t in table]
    if not known:
        return None
    return np.mean(known, axis=0)


@dataclass(frozen=True, eq=False)
class EmbeddingEnsemble:
    tables: tuple
    _units: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        tables = tuple(self.tables)
        if not tables:
            raise ValueError("an ensemble needs at least one table")
        names = [t.name for t in tables]
        if len(set(names)) != len(names):
            raise ValueError(f"table names must be unique, got {names}")
        object.__setattr__(self, "tables", tables)

    @property
    def names(self) -> list:
        return [t.name for t in self.tables]

    def __len__(self):
        return len(self.tables)

    def subset(self, names: Sequence[str]) -> "EmbeddingEnsemble":
        by_name = {t.name: t for t in self.tables}
        missing = [n for n in names if n not in by_name]
        if missing:
            raise KeyError(f"unknown tables {missing}")
        return EmbeddingEnsemble(tuple(by_name[n] for n in names))

    def covers(self, phrase: str) -> bool:
        return any(u is not None for u in self.unit_vectors(phrase))

    def unit_vectors(self, phrase: str) -> tuple:
        """Per-table unit phrase vector (``None`` where the table cannot embed it).

        Results are memoised; tables are immutable so the cache never goes stale.
        """
        hit = self._units.get(phrase)
        if hit is None:
            units = []
            for table in self.tables:
                v = phrase_vector(table, phrase)
                norm = None if v is None else np.linalg.norm(v)
                units.append(None if not norm else v / norm)
            hit = self._units[phrase] = tuple(units)
        return hit


def averaged_similarity(ensemble: EmbeddingEnsemble, x: str, y: str) -> Optional[float]:
    """Mean cosine of ``x`` and ``y`` over the tables that embed both.

    Returns ``None`` when no table covers both phrases.
    """
    sims = []
    for table in ensemble.tables:
        a, b = phrase_vector(table, x), phrase_vector(table, y)
        if a is None or b is None or not a.any() or not b.any():
            continue
        sims.append(cosine(a, b))
    if not sims:
        return None
    return math.fsum(sims) / len(sims)


class SimilarityIndex:
    """Averaged similarity against a fixed list of target phrases.

    Unit vectors of the targets are stacked once per table; each query
    phrase is then one matrix-vector product per table.
    """

    def __init__(self, ensemble: EmbeddingEnsemble, targets: Sequence[str]):
        self.ensemble = ensemble
        self.targets = tuple(targets)
        self._tables = []
        for k, table in enumerate(ensemble.tables):
            units = [ensemble.unit_vectors(y)[k] for y in self.targets]
            mask = np.array([u is not None for u in units], dtype=bool)
            mat = np.zeros((len(units), table.dim))
            for row, u in enumerate(units):
                if u is not None:
                    mat[row] = u
            self._tables.append((mat, mask))

    def row(self, x: str) -> np.ndarray:
        """Similarities of ``x`` to every target, NaN where no table covers the pair.

        A row depends only on ``x`` and the targets, never on other queries.
        """
        total = np.zeros(len(self.targets))
        count = np.zeros(len(self.targets))
        for (mat, mask), u in zip(self._tables, self.ensemble.unit_vectors(x)):
            if u is None:
                continue
            total += np.where(mask, np.clip(mat @ u, -1.0, 1.0), 0.0)
            count += mask
        out = np.full(len(self.targets), np.nan)
        covered = count > 0
        out[covered] = total[covered] / count[covered]
        return out

    def rows(self, xs: Sequence[str]) -> np.ndarray:
        out = np.full((len(xs), len(self.targets)), np.nan)
        for i, x in enumerate(xs):
            out[i] = self.row(x)
        return out


def similarity_rows(ensemble: EmbeddingEnsemble, xs: Sequence[str], ys: Sequence[str]) -> np.ndarray:
    """Averaged similarity of every ``x`` against every ``y`` (NaN if uncovered)."""
    return SimilarityIndex(ensemble, ys).rows(xs)
