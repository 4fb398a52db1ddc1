"""Command-line front end.

Every subcommand parses its inputs, makes the corresponding library call and
writes its outputs atomically. Failures print one JSON line on stderr and
exit with 2 (usage), 3 (data/parse) or 4 (infeasible configuration).
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from . import classifier, corpus, embeddings, evaluation, features, filterbank, synthetic
from ._io import atomic_write_text
from .errors import DataError, InfeasibleError

log = logging.getLogger("tagsem")

EXIT_USAGE, EXIT_DATA, EXIT_INFEASIBLE = 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _unit_interval(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 < value <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1], got {value}")
    return value


def _positive_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return value


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return value


def _threshold_list(text):
    return [_unit_interval(t) for t in text.split(",") if t.strip()]


def _fraction(text):
    value = float(text)
    if not 0.0 <= value < 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1), got {value}")
    return value


def _open_unit_interval(text):
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tagsem", description="Tag-based semantic features for scene classification.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    fmt = argparse.ArgumentDefaultsHelpFormatter

    emb = _Parser(add_help=False)
    emb.add_argument("--embedding", action="append", required=True, metavar="PATH",
                     help="embedding text file; repeat once per table (name = file stem)")

    bank = _Parser(add_help=False)
    bank.add_argument("--delta", type=_unit_interval, default=0.50, help="filter-bank threshold")
    bank.add_argument("--top-n", type=_positive_int, default=500, help="candidate tags per training image")

    feat = _Parser(add_help=False)
    feat.add_argument("--threshold-t", type=_unit_interval, default=0.40, help="histogram threshold T")

    svm = _Parser(add_help=False)
    svm.add_argument("--gamma", type=_positive_float, default=1e-5, help="RBF kernel width")
    svm.add_argument("--c-penalty", type=_positive_float, default=50.0, help="SVM cost C")
    svm.add_argument("--tol", type=_positive_float, default=1e-3, help="SMO stopping tolerance")

    splits = _Parser(add_help=False)
    splits.add_argument("--splits", type=Path, help="split file (set_index,image_id,train|test)")
    splits.add_argument("--n-sets", type=_positive_int, default=10, help="random splits to draw")
    splits.add_argument("--train-per-category", type=_positive_int, default=70,
                        help="training documents per category")
    splits.add_argument("--test-per-category", type=_positive_int, default=None,
                        help="test documents per category; all remaining when omitted")
    splits.add_argument("--seed", type=int, default=0, help="split sampling seed")
    splits.add_argument("--jobs", type=_positive_int, default=1, help="splits evaluated in parallel")
    splits.add_argument("--save-splits", type=Path, help="also write the splits used")

    p = sub.add_parser("synth", help="generate a synthetic corpus and embedding tables", formatter_class=fmt)
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--categories", type=_positive_int, default=8)
    p.add_argument("--docs-per-category", type=_positive_int, default=130)
    p.add_argument("--vocab-per-category", type=_positive_int, default=20)
    p.add_argument("--dim", type=_positive_int, default=50)
    p.add_argument("--tightness", type=_open_unit_interval, default=0.9)
    p.add_argument("--noise", type=_fraction, default=0.1)
    p.add_argument("--tags-per-doc", type=_positive_int, default=60)
    p.add_argument("--tables", type=_positive_int, default=3)
    p.add_argument("--random-tables", type=int, nargs="*", default=[], help="indices of signal-free tables")
    p.add_argument("--oov-rate", type=_fraction, default=0.0)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("build-bank", parents=[emb, bank], help="build filter banks and the codebook",
                       formatter_class=fmt)
    p.add_argument("--corpus", type=Path, required=True, help="tag corpus (JSONL)")
    p.add_argument("--splits", type=Path, help="restrict to the training ids of --set-index")
    p.add_argument("--set-index", type=int, default=0)
    p.add_argument("--out", type=Path, required=True, help="codebook JSON file")

    p = sub.add_parser("extract", parents=[emb, feat], help="extract histogram features", formatter_class=fmt)
    p.add_argument("--corpus", type=Path, required=True, help="tag corpus (JSONL)")
    p.add_argument("--codebook", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="feature CSV file")

    p = sub.add_parser("train", parents=[svm], help="train a one-vs-rest RBF SVM", formatter_class=fmt)
    p.add_argument("--features", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="model JSON file")

    p = sub.add_parser("predict", help="predict categories for a feature file", formatter_class=fmt)
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--features", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="CSV image_id,category,predicted")

    common = [emb, bank, feat, svm, splits]
    p = sub.add_parser("eval", parents=common, help="mean accuracy over train/test splits", formatter_class=fmt)
    p.add_argument("--corpus", type=Path, required=True, help="tag corpus (JSONL)")
    p.add_argument("--out", type=Path, required=True, help="report CSV file")

    p = sub.add_parser("ablate-threshold", parents=common, help="accuracy for several T values",
                       formatter_class=fmt)
    p.add_argument("--corpus", type=Path, required=True, help="tag corpus (JSONL)")
    p.add_argument("--thresholds", type=_threshold_list, default=[0.3, 0.4, 0.5, 0.6, 0.7, 0.8],
                   help="comma-separated T values")
    p.add_argument("--out", type=Path, required=True, help="report CSV file")

    p = sub.add_parser("ablate-embeddings", parents=common, help="accuracy per table and averaged",
                       formatter_class=fmt)
    p.add_argument("--corpus", type=Path, required=True, help="tag corpus (JSONL)")
    p.add_argument("--modes", default=None, help="comma-separated table names and/or 'averaged'")
    p.add_argument("--out", type=Path, required=True, help="report CSV file")
    return parser


def _load_tables(paths):
    tables = [embeddings.load_table(p) for p in paths]
    names = [t.name for t in tables]
    if len(set(names)) != len(names):
        raise UsageError(f"embedding files must have distinct stems, got {names}")
    return tables


def _load_docs(path):
    return corpus.preprocess_all(corpus.load_corpus(path))


def _config(args):
    return filterbank.PipelineConfig(
        delta=getattr(args, "delta", 0.50),
        t_threshold=getattr(args, "threshold_t", 0.40),
        top_n=getattr(args, "top_n", 500),
        gamma=getattr(args, "gamma", 1e-5),
        c_penalty=getattr(args, "c_penalty", 50.0),
    )


def _splits(args, docs):
    if args.splits is not None:
        result = evaluation.load_splits(args.splits)
    else:
        result = evaluation.make_splits(docs, args.n_sets, args.train_per_category,
                                        args.test_per_category, args.seed)
    if args.save_splits is not None:
        evaluation.save_splits(result, args.save_splits, docs)
    return result


def cmd_synth(args):
    records, tables = synthetic.generate_synthetic(
        n_categories=args.categories, docs_per_category=args.docs_per_category,
        vocab_per_category=args.vocab_per_category, dim=args.dim, tightness=args.tightness,
        noise_rate=args.noise, tags_per_doc=args.tags_per_doc, n_tables=args.tables,
        random_tables=tuple(args.random_tables), oov_rate=args.oov_rate, seed=args.seed,
    )
    args.out_dir.mkdir(parents=True, exist_ok=True)
    corpus.save_corpus(records, args.out_dir / "corpus.jsonl")
    for t in tables:
        embeddings.save_table(t, args.out_dir / f"{t.name}.txt")
    log.info("wrote %d records and %d tables to %s", len(records), len(tables), args.out_dir)


def cmd_build_bank(args):
    docs = _load_docs(args.corpus)
    ensemble = embeddings.EmbeddingEnsemble(_load_tables(args.embedding))
    if args.splits is not None:
        chosen = [s for s in evaluation.load_splits(args.splits) if s.set_index == args.set_index]
        if not chosen:
            raise DataError(f"no split with set_index {args.set_index}", args.splits)
        docs = [d for d in docs if d.image_id in chosen[0].train_ids]
    cb = evaluation.build_split_codebook(docs, ensemble, _config(args))
    filterbank.save_codebook(cb, args.out)
    log.info("codebook with %d filter words from %d banks", cb.n, len(cb.banks))


def cmd_extract(args):
    docs = _load_docs(args.corpus)
    ensemble = embeddings.EmbeddingEnsemble(_load_tables(args.embedding))
    cb = filterbank.load_codebook(args.codebook)
    uncovered = [w for w in cb.filter_words if not ensemble.covers(w)]
    if uncovered:
        raise DataError(f"filter word {uncovered[0]!r} is not in any embedding table "
                        f"({len(uncovered)} of {cb.n}); codebook and embeddings do not match", args.codebook)
    fvs = features.extract_matrix(docs, cb, ensemble, args.threshold_t)
    features.save_features(fvs, args.out, cb.n)


def cmd_train(args):
    fvs = features.load_features(args.features)
    if not fvs:
        raise DataError("feature file has no rows", args.features)
    X = features.feature_matrix(fvs)
    model = classifier.train(X, [f.category for f in fvs], C=args.c_penalty, gamma=args.gamma, tol=args.tol)
    classifier.save_model(model, args.out)


def cmd_predict(args):
    model = classifier.load_model(args.model)
    fvs = features.load_features(args.features)
    if fvs and len(fvs[0].counts) != model.n_features:
        raise DataError(f"{len(fvs[0].counts)} features per row but the model expects {model.n_features}",
                        args.features)
    predicted = model.predict(features.feature_matrix(fvs)) if fvs else []
    lines = ["image_id,category,predicted"] + [f"{f.image_id},{f.category},{p}" for f, p in zip(fvs, predicted)]
    atomic_write_text(args.out, "".join(line + "\n" for line in lines))


def cmd_eval(args):
    docs = _load_docs(args.corpus)
    ensemble = embeddings.EmbeddingEnsemble(_load_tables(args.embedding))
    config = _config(args)
    result = evaluation.evaluate(docs, ensemble, config, _splits(args, docs), jobs=args.jobs)
    row = evaluation.AblationRow(repr(config.t_threshold), result.mean_accuracy, result.accuracies)
    evaluation.save_report([row], args.out)
    log.info("mean accuracy %.4f", result.mean_accuracy)


def cmd_ablate_threshold(args):
    docs = _load_docs(args.corpus)
    ensemble = embeddings.EmbeddingEnsemble(_load_tables(args.embedding))
    report = evaluation.ablate_threshold(docs, ensemble, _config(args), _splits(args, docs),
                                         args.thresholds, jobs=args.jobs)
    evaluation.save_report(report, args.out)


def cmd_ablate_embeddings(args):
    docs = _load_docs(args.corpus)
    tables = _load_tables(args.embedding)
    modes = None if args.modes is None else [m.strip() for m in args.modes.split(",") if m.strip()]
    known = {t.name for t in tables} | {evaluation.AVERAGED}
    if modes is not None and (not modes or any(m not in known for m in modes)):
        raise UsageError(f"--modes must name tables from {sorted(known)}")
    report = evaluation.ablate_embeddings(docs, tables, _config(args), _splits(args, docs), modes, jobs=args.jobs)
    evaluation.save_report(report, args.out)


COMMANDS = {
    "synth": cmd_synth,
    "build-bank": cmd_build_bank,
    "extract": cmd_extract,
    "train": cmd_train,
    "predict": cmd_predict,
    "eval": cmd_eval,
    "ablate-threshold": cmd_ablate_threshold,
    "ablate-embeddings": cmd_ablate_embeddings,
}


def _fail(code, kind, exc):
    record = {"error": kind, "exit": code, "message": str(exc)}
    path = getattr(exc, "path", None) or getattr(exc, "filename", None)
    if path:
        record["path"] = str(path)
    print(json.dumps(record, ensure_ascii=False), file=sys.stderr)
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _fail(EXIT_USAGE, "usage", exc)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        return _fail(EXIT_USAGE, "usage", exc)
    except InfeasibleError as exc:
        return _fail(EXIT_INFEASIBLE, "infeasible", exc)
    except (DataError, ValueError, OSError) as exc:
        return _fail(EXIT_DATA, "data", exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
