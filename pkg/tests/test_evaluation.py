import pytest

from tagsem.corpus import TagDocument, preprocess_all
from tagsem.embeddings import EmbeddingEnsemble
from tagsem.errors import DataError, InfeasibleError
from tagsem.evaluation import (
    SplitSpec,
    ablate_embeddings,
    ablate_threshold,
    build_split_codebook,
    dump_report,
    evaluate,
    load_report,
    load_splits,
    make_splits,
    save_report,
    save_splits,
    _SplitRun,
)
from tagsem.features import FeatureExtractor
from tagsem.filterbank import PipelineConfig, dump_codebook
from tagsem.synthetic import generate_synthetic

CFG = PipelineConfig()


def fake_docs(n_cats, per_cat):
    return [TagDocument(f"c{c}_{k}", f"cat{'abcdefgh'[c]}", {}) for c in range(n_cats) for k in range(per_cat)]


def test_event8_protocol():
    docs = fake_docs(8, 130)
    splits = make_splits(docs, 10, 70, 60, seed=1)
    assert len(splits) == 10
    by_id = {d.image_id: d.category for d in docs}
    for s in splits:
        assert len(s.train_ids) == 8 * 70 and len(s.test_ids) == 8 * 60
        assert not s.train_ids & s.test_ids
        assert s.train_ids | s.test_ids == set(by_id)  # all 130 per category used
        for cat in set(by_id.values()):
            assert sum(by_id[i] == cat for i in s.train_ids) == 70
    assert splits[0].train_ids != splits[1].train_ids


def test_scene15_protocol():
    docs = fake_docs(3, 150) + [TagDocument(f"extra{k}", "catd", {}) for k in range(210)]
    s = make_splits(docs, 1, 100, None, seed=0)[0]
    assert len(s.train_ids) == 4 * 100
    assert len(s.test_ids) == 3 * 50 + 110


def test_splits_deterministic_and_seeded():
    docs = fake_docs(4, 20)
    assert make_splits(docs, 3, 10, 5, seed=7) == make_splits(docs, 3, 10, 5, seed=7)
    assert make_splits(docs, 3, 10, 5, seed=7) != make_splits(docs, 3, 10, 5, seed=8)


def test_insufficient_documents():
    docs = fake_docs(2, 20) + [TagDocument("lonely", "small", {})]
    with pytest.raises(InfeasibleError, match="small"):
        make_splits(docs, 1, 10, 5)


def test_split_validation():
    with pytest.raises(ValueError):
        SplitSpec(0, {"a"}, {"a", "b"})
    with pytest.raises(ValueError):
        SplitSpec(0, set(), {"b"})


def test_split_file_roundtrip(tmp_path):
    docs = fake_docs(3, 10)
    splits = make_splits(docs, 2, 6, 4, seed=2)
    p = save_splits(splits, tmp_path / "splits.csv", docs)
    assert p.read_text().splitlines()[0].split(",")[2] in ("train", "test")
    assert load_splits(p) == splits
    p.write_text("0,a,train\n0,b,validate\n")
    with pytest.raises(DataError, match="line 2"):
        load_splits(p)


def test_perfect_separation(event8, event8_ensemble):
    docs, _ = event8
    split = make_splits(docs, 1, 70, 60, seed=0)[0]
    train_docs = [d for d in docs if d.image_id in split.train_ids]
    cb = build_split_codebook(train_docs, event8_ensemble, CFG)
    # brute-force inspection: every document scores highest on its own category's bins
    ex = FeatureExtractor(cb, event8_ensemble)
    owner = {w: next(iter(cats)) for w, cats in cb.provenance.items()}
    for d in docs[::13]:
        counts = ex.extract(d, CFG.t_threshold).counts
        per_cat = {}
        for w, c in zip(cb.filter_words, counts):
            per_cat[owner[w]] = per_cat.get(owner[w], 0) + c
        assert max(per_cat, key=per_cat.get) == d.category
    result = evaluate(docs, event8_ensemble, CFG, [split])
    assert result.mean_accuracy == 1.0


class Constant:
    def __init__(self, label):
        self.label = label

    def predict(self, X):
        return [self.label] * len(X)


def test_constant_predictor_is_chance(event8, event8_ensemble):
    docs, _ = event8
    splits = make_splits(docs, 2, 70, 60, seed=0)
    result = evaluate(docs, event8_ensemble, CFG, splits, fit=lambda X, y: Constant(sorted(set(y))[0]))
    assert result.accuracies == (0.125, 0.125) and result.mean_accuracy == 0.125


def test_single_split_mean_of_one(small_corpus):
    docs, ens = small_corpus
    split = make_splits(docs, 1, 12, None, seed=3)[0]
    result = evaluate(docs, ens, CFG, [split])
    assert result.mean_accuracy == result.accuracies[0]
    assert 0.0 <= result.mean_accuracy <= 1.0


def test_threshold_report(small_corpus):
    docs, ens = small_corpus
    splits = make_splits(docs, 2, 12, None, seed=3)
    report = ablate_threshold(docs, ens, CFG, splits)
    assert report.axis == "threshold"
    assert [r.setting for r in report.rows] == ["0.3", "0.4", "0.5", "0.6", "0.7", "0.8"]
    for r in report.rows:
        assert len(r.accuracies) == 2 and r.mean_accuracy == sum(r.accuracies) / 2
    one = ablate_threshold(docs, ens, CFG, splits, [0.4])
    assert one.rows[0].accuracies == evaluate(docs, ens, CFG, splits).accuracies
    with pytest.raises(ValueError):
        ablate_threshold(docs, ens, CFG, splits, [0.0])


def test_embedding_report_single_table_mean_of_one(small_corpus):
    docs, ens = small_corpus
    splits = make_splits(docs, 2, 12, None, seed=3)
    name = ens.names[0]
    single = ablate_embeddings(docs, ens.tables[:1], CFG, splits, [name, "averaged"])
    assert single.rows[0].accuracies == single.rows[1].accuracies
    full = ablate_embeddings(docs, ens.tables, CFG, splits)
    assert [r.setting for r in full.rows] == ens.names + ["averaged"]


def test_report_file(tmp_path, small_corpus):
    docs, ens = small_corpus
    report = ablate_threshold(docs, ens, CFG, make_splits(docs, 2, 12, None, seed=3), [0.3, 0.5])
    p = save_report(report, tmp_path / "r.csv")
    assert p.read_text().splitlines()[0] == "setting,mean_accuracy,acc_set_0,acc_set_1"
    assert load_report(p) == report
    assert dump_report(load_report(p)) == dump_report(report)


def test_leak_check(small_corpus):
    docs, ens = small_corpus
    split = make_splits(docs, 1, 12, None, seed=4)[0]
    reference = dump_codebook(_SplitRun(docs, ens, CFG, split).codebook)
    for victim in sorted(split.test_ids):
        remaining = [d for d in docs if d.image_id != victim]
        pruned = SplitSpec(0, split.train_ids, split.test_ids - {victim})
        assert dump_codebook(_SplitRun(remaining, ens, CFG, pruned).codebook) == reference


def test_single_category_fails_downstream():
    records, tables = generate_synthetic(n_categories=1, docs_per_category=10, vocab_per_category=5,
                                         dim=8, tags_per_doc=10, seed=0)
    docs = preprocess_all(records)
    splits = make_splits(docs, 1, 5, None)
    with pytest.raises(InfeasibleError):
        evaluate(docs, EmbeddingEnsemble(tables), CFG, splits)


def test_unknown_ids_in_split(small_corpus):
    docs, ens = small_corpus
    with pytest.raises(DataError, match="unknown"):
        evaluate(docs, ens, CFG, [SplitSpec(0, {"nope"}, {docs[0].image_id})])


def test_parallel_matches_serial(small_corpus):
    docs, ens = small_corpus
    splits = make_splits(docs, 3, 12, None, seed=9)
    assert evaluate(docs, ens, CFG, splits, jobs=3) == evaluate(docs, ens, CFG, splits)
