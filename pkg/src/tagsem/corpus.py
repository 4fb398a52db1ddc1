"""Tag corpora: raw records, canonical tag documents and tokenization.

A corpus file is UTF-8 JSON lines, one image per line::

    {"image_id": "img_001", "category": "library", "tags": ["Books", "Library-2019"], "k_similar": 50}

``k_similar`` is optional and only carried along as metadata.
"""

import json
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from ._io import atomic_write_text
from .errors import DataError

DEFAULT_K_SIMILAR = 50

_ASCII_SYMBOLS = frozenset("$+<=>^`|~")


@dataclass(frozen=True)
class RawTagRecord:
    image_id: str
    category: str
    tags: tuple
    k_similar: int = DEFAULT_K_SIMILAR

    def __post_init__(self):
        if not isinstance(self.image_id, str) or not self.image_id:
            raise ValueError("image_id must be a non-empty string")
        if not isinstance(self.category, str) or not self.category:
            raise ValueError("category must be a non-empty string")
        object.__setattr__(self, "tags", tuple(self.tags))
        if not all(isinstance(t, str) for t in self.tags):
            raise ValueError("tags must be strings")
        if isinstance(self.k_similar, bool) or not isinstance(self.k_similar, int) or self.k_similar < 1:
            raise ValueError("k_similar must be a positive integer")


@dataclass(frozen=True)
class TagDocument:
    """Preprocessed tags of one image, kept as a token -> count multiset."""

    image_id: str
    category: str
    tags: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "tags", {t: int(c) for t, c in self.tags.items() if c > 0})

    @property
    def m(self) -> int:
        """Total tag count, with multiplicity."""
        return sum(self.tags.values())

    def tokens(self) -> list:
        """Distinct tokens in lexicographic order."""
        return sorted(self.tags)


def _is_punctuation(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P") or ch in _ASCII_SYMBOLS


def _is_dash(ch: str) -> bool:
    return unicodedata.category(ch) == "Pd"


def tokenize(text: str) -> list:
    """Split one raw tag into canonical tokens.

    Lowercases, turns dashes into separators, deletes the remaining
    punctuation and drops every token that contains a decimal digit.

    >>> tokenize("Wine-Cellar!")
    ['wine', 'cellar']
    >>> tokenize("2019")
    []
    """
    text = text.lower()
    text = "".join(" " if _is_dash(ch) else ch for ch in text)
    text = "".join(ch for ch in text if not _is_punctuation(ch))
    return [tok for tok in text.split() if not any(ch.isdecimal() for ch in tok)]


def preprocess(raw: RawTagRecord) -> TagDocument:
    counts = Counter()
    for tag in raw.tags:
        counts.update(tokenize(tag))
    return TagDocument(raw.image_id, raw.category, dict(sorted(counts.items())))


def preprocess_all(records: Iterable[RawTagRecord]) -> list:
    return [preprocess(r) for r in records]


def _parse_record(obj, path, lineno) -> RawTagRecord:
    if not isinstance(obj, dict):
        raise DataError("record must be a JSON object", path, lineno)
    for key, kind in (("image_id", str), ("category", str), ("tags", list)):
        if key not in obj:
            raise DataError(f"missing field {key!r}", path, lineno)
        if not isinstance(obj[key], kind):
            raise DataError(f"field {key!r} must be a {kind.__name__}", path, lineno)
    k = obj.get("k_similar", DEFAULT_K_SIMILAR)
    try:
        return RawTagRecord(obj["image_id"], obj["category"], obj["tags"], k)
    except ValueError as exc:
        raise DataError(str(exc), path, lineno) from None


def load_corpus(path) -> list:
    """Read a JSON-lines corpus file into :class:`RawTagRecord` objects.

    Blank lines are skipped. Raises :class:`DataError` naming the line for
    malformed records and for repeated image ids.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError("corpus file not found", path)
    records, seen = [], {}
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"invalid JSON ({exc.msg})", path, lineno) from None
            rec = _parse_record(obj, path, lineno)
            if rec.image_id in seen:
                raise DataError(
                    f"duplicate image_id {rec.image_id!r} (first seen on line {seen[rec.image_id]})",
                    path,
                    lineno,
                )
            seen[rec.image_id] = lineno
            records.append(rec)
    return records


def dump_corpus(records: Iterable[RawTagRecord]) -> str:
    lines = []
    for r in records:
        obj = {"image_id": r.image_id, "category": r.category, "tags": list(r.tags), "k_similar": r.k_similar}
        lines.append(json.dumps(obj, ensure_ascii=False))
    return "".join(line + "\n" for line in lines)


def save_corpus(records: Iterable[RawTagRecord], path) -> Path:
    return atomic_write_text(path, dump_corpus(records))


def categories_of(docs) -> list:
    """Distinct categories in sorted order; the canonical class order."""
    return sorted({d.category for d in docs})
