"""Split protocols, accuracy evaluation and the two ablation harnesses."""

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from ._io import atomic_write_text
from .classifier import train
from .corpus import categories_of
from .embeddings import EmbeddingEnsemble
from .errors import DataError, InfeasibleError
from .features import FeatureExtractor, feature_matrix
from .filterbank import Codebook, PipelineConfig, build_codebook, build_filter_banks

AVERAGED = "averaged"


@dataclass(frozen=True)
class SplitSpec:
    set_index: int
    train_ids: frozenset
    test_ids: frozenset

    def __post_init__(self):
        object.__setattr__(self, "train_ids", frozenset(self.train_ids))
        object.__setattr__(self, "test_ids", frozenset(self.test_ids))
        if not self.train_ids or not self.test_ids:
            raise ValueError(f"split {self.set_index}: train and test sets must be non-empty")
        overlap = self.train_ids & self.test_ids
        if overlap:
            raise ValueError(f"split {self.set_index}: {len(overlap)} ids in both train and test")


@dataclass(frozen=True)
class EvalResult:
    mean_accuracy: float
    accuracies: tuple


@dataclass(frozen=True)
class AblationRow:
    setting: str
    mean_accuracy: float
    accuracies: tuple


@dataclass(frozen=True)
class AblationReport:
    axis: str  # "threshold" or "embedding_mode"
    rows: tuple

    def row(self, setting) -> AblationRow:
        return next(r for r in self.rows if r.setting == str(setting))


def make_splits(docs, n_sets: int, train_per_category: int, test_per_category: Optional[int] = None,
                seed: int = 0) -> list:
    """Random per-category train/test splits.

    Each set samples, independently per category and without replacement,
    ``train_per_category`` training documents and ``test_per_category``
    test documents (all the remaining ones when ``None``).
    """
    if n_sets < 1 or train_per_category < 1:
        raise ValueError("n_sets and train_per_category must be positive")
    if test_per_category is not None and test_per_category < 1:
        raise ValueError("test_per_category must be positive")
    by_cat = {}
    for d in docs:
        by_cat.setdefault(d.category, []).append(d.image_id)
    need = train_per_category + (test_per_category or 1)
    for cat in sorted(by_cat):
        if len(by_cat[cat]) < need:
            raise InfeasibleError(f"category {cat!r} has {len(by_cat[cat])} documents, needs {need}")
    rng = np.random.default_rng(seed)
    splits = []
    for s in range(n_sets):
        train_ids, test_ids = [], []
        for cat in sorted(by_cat):
            ids = by_cat[cat]
            order = rng.permutation(len(ids))
            stop = None if test_per_category is None else train_per_category + test_per_category
            train_ids += [ids[k] for k in order[:train_per_category]]
            test_ids += [ids[k] for k in order[train_per_category:stop]]
        splits.append(SplitSpec(s, train_ids, test_ids))
    return splits


def _partition(docs, split):
    known = {d.image_id for d in docs}
    missing = (split.train_ids | split.test_ids) - known
    if missing:
        raise DataError(f"split {split.set_index} names unknown image ids, e.g. {sorted(missing)[0]!r}")
    train_docs = [d for d in docs if d.image_id in split.train_ids]
    test_docs = [d for d in docs if d.image_id in split.test_ids]
    return train_docs, test_docs


def build_split_codebook(train_docs, ensemble: EmbeddingEnsemble, config: PipelineConfig) -> Codebook:
    """Filter banks and codebook from training documents alone."""
    banks = build_filter_banks(train_docs, categories_of(train_docs), ensemble, config)
    return build_codebook(banks)


def accuracy(predicted, actual) -> float:
    if len(predicted) != len(actual) or not len(actual):
        raise ValueError("accuracy needs two equally long, non-empty label lists")
    return sum(p == a for p, a in zip(predicted, actual)) / len(actual)


def _default_trainer(config):
    def fit(X, y):
        return train(X, y, C=config.c_penalty, gamma=config.gamma)
    return fit


class _SplitRun:
    """Training/test material of one split, built once and reused across settings."""

    def __init__(self, docs, ensemble, config, split):
        self.split = split
        self.train_docs, self.test_docs = _partition(docs, split)
        self.codebook = build_split_codebook(self.train_docs, ensemble, config)
        self.extractor = FeatureExtractor(self.codebook, ensemble)

    def score(self, threshold, fit) -> float:
        X_train = feature_matrix(self.extractor.extract_many(self.train_docs, threshold))
        X_test = feature_matrix(self.extractor.extract_many(self.test_docs, threshold))
        model = fit(X_train, [d.category for d in self.train_docs])
        return accuracy(model.predict(X_test), [d.category for d in self.test_docs])


def _map(fn, items, jobs):
    if jobs is None or jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))  # preserves input order


def _mean(values) -> float:
    return math.fsum(values) / len(values)


def _sweep(docs, ensemble, config, splits, thresholds, fit, jobs):
    """Accuracy table ``[threshold][split]``; one codebook per split."""
    if not splits:
        raise ValueError("at least one split is required")
    fit = fit or _default_trainer(config)

    def one(split):
        run = _SplitRun(docs, ensemble, config, split)
        return [run.score(t, fit) for t in thresholds]

    per_split = _map(one, sorted(splits, key=lambda s: s.set_index), jobs)
    return [tuple(row[k] for row in per_split) for k in range(len(thresholds))]


def evaluate(docs, ensemble: EmbeddingEnsemble, config: PipelineConfig, splits: Sequence[SplitSpec],
             fit: Optional[Callable] = None, jobs: int = 1) -> EvalResult:
    """Mean test accuracy of the full pipeline over the given splits.

    For every split the filter banks, codebook and classifier are built from
    that split's training documents only. ``fit(X, y)`` may replace the SVM;
    it must return an object with a ``predict(X)`` method.
    """
    (accs,) = _sweep(docs, ensemble, config, splits, [config.t_threshold], fit, jobs)
    return EvalResult(_mean(accs), accs)


def ablate_threshold(docs, ensemble, config, splits, thresholds=(0.3, 0.4, 0.5, 0.6, 0.7, 0.8),
                     fit=None, jobs: int = 1) -> AblationReport:
    for t in thresholds:
        if not 0.0 < t <= 1.0:
            raise ValueError(f"thresholds must lie in (0, 1], got {t}")
    table = _sweep(docs, ensemble, config, splits, list(thresholds), fit, jobs)
    rows = tuple(AblationRow(_fmt(t), _mean(accs), accs) for t, accs in zip(thresholds, table))
    return AblationReport("threshold", rows)


def ablate_embeddings(docs, tables, config, splits, modes=None, fit=None, jobs: int = 1) -> AblationReport:
    """Accuracy with each single table and with the averaged ensemble.

    ``modes`` holds table names and/or ``"averaged"``; the default is every
    table in order followed by ``"averaged"``.
    """
    if not tables:
        raise ValueError("at least one embedding table is required")
    full = EmbeddingEnsemble(tuple(tables))
    if modes is None:
        modes = full.names + [AVERAGED]
    rows = []
    for mode in modes:
        ensemble = full if mode == AVERAGED else full.subset([mode])
        (accs,) = _sweep(docs, ensemble, config, splits, [config.t_threshold], fit, jobs)
        rows.append(AblationRow(mode, _mean(accs), accs))
    return AblationReport("embedding_mode", tuple(rows))


def _fmt(x) -> str:
    return repr(float(x))


def dump_report(report) -> str:
    rows = report.rows if isinstance(report, AblationReport) else report
    width = max(len(r.accuracies) for r in rows)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["setting", "mean_accuracy"] + [f"acc_set_{k}" for k in range(width)])
    for r in rows:
        writer.writerow([r.setting, repr(r.mean_accuracy)] + [repr(a) for a in r.accuracies])
    return buf.getvalue()


def save_report(report, path) -> Path:
    return atomic_write_text(path, dump_report(report))


def load_report(path, axis: str = "threshold") -> AblationReport:
    path = Path(path)
    if not path.is_file():
        raise DataError("report file not found", path)
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[:2] != ["setting", "mean_accuracy"]:
            raise DataError("expected header setting,mean_accuracy,...", path, 1)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            try:
                rows.append(AblationRow(row[0], float(row[1]), tuple(float(a) for a in row[2:] if a)))
            except (IndexError, ValueError):
                raise DataError("malformed report row", path, lineno) from None
    return AblationReport(axis, tuple(rows))


def dump_splits(splits: Sequence[SplitSpec], docs=None) -> str:
    """Split file text: ``set_index,image_id,train|test`` per line.

    Ids are written in corpus order when ``docs`` is given, sorted otherwise.
    """
    order = {d.image_id: k for k, d in enumerate(docs)} if docs is not None else None
    key = (lambda i: (order.get(i, len(order)), i)) if order is not None else None
    lines = []
    for s in sorted(splits, key=lambda s: s.set_index):
        for role, ids in (("train", s.train_ids), ("test", s.test_ids)):
            lines += [f"{s.set_index},{i},{role}" for i in sorted(ids, key=key)]
    return "".join(line + "\n" for line in lines)


def save_splits(splits, path, docs=None) -> Path:
    return atomic_write_text(path, dump_splits(splits, docs))


def load_splits(path) -> list:
    """Read a split file; the fixed-split protocol (e.g. 80/20 predefined) uses this."""
    path = Path(path)
    if not path.is_file():
        raise DataError("split file not found", path)
    sets = {}
    with path.open(encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            if len(row) != 3 or row[2] not in ("train", "test"):
                raise DataError("expected set_index,image_id,train|test", path, lineno)
            try:
                idx = int(row[0])
            except ValueError:
                raise DataError("set_index must be an integer", path, lineno) from None
            train_ids, test_ids = sets.setdefault(idx, (set(), set()))
            (train_ids if row[2] == "train" else test_ids).add(row[1])
    try:
        return [SplitSpec(k, *sets[k]) for k in sorted(sets)]
    except ValueError as exc:
        raise DataError(str(exc), path) from None


