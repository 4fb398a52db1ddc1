import pytest

from tagsem.corpus import dump_corpus, preprocess_all
from tagsem.embeddings import EmbeddingEnsemble, averaged_similarity, cosine, dump_table
from tagsem.filterbank import PipelineConfig, build_filter_bank
from tagsem.synthetic import SyntheticParams, generate_synthetic


def test_same_seed_same_bytes():
    a = generate_synthetic(n_categories=3, docs_per_category=5, seed=11)
    b = generate_synthetic(n_categories=3, docs_per_category=5, seed=11)
    c = generate_synthetic(n_categories=3, docs_per_category=5, seed=12)
    assert dump_corpus(a[0]) == dump_corpus(b[0]) != dump_corpus(c[0])
    assert [dump_table(t) for t in a[1]] == [dump_table(t) for t in b[1]]


def test_geometry():
    p = SyntheticParams(n_categories=4, docs_per_category=3, vocab_per_category=10, dim=20,
                        tightness=0.85, seed=2)
    records, tables = generate_synthetic(p)
    labels = sorted({r.category for r in records})
    assert len(labels) == 4
    for t in tables:
        for label in labels:
            assert label in t
    # every word of a category's documents (apart from noise) sits within the cone
    docs = preprocess_all(records)
    for d in docs:
        for tok in d.tags:
            sims = [cosine(tables[0][tok], tables[0][lab]) for lab in labels]
            assert max(sims) >= 0.85 - 1e-12 or max(abs(s) for s in sims) < 1e-9


def test_noise_free_banks_recover_vocabulary():
    records, tables = generate_synthetic(n_categories=3, noise_rate=0.0, tightness=0.9, seed=4,
                                         docs_per_category=40, junk_rate=0.0)
    docs = preprocess_all(records)
    ens = EmbeddingEnsemble(tables)
    for cat in sorted({d.category for d in docs}):
        cat_docs = [d for d in docs if d.category == cat]
        vocab = {t for d in cat_docs for t in d.tags}
        # brute-force D over the generated tables
        above = {t for t in vocab if averaged_similarity(ens, t, cat) >= 0.5}
        bank = build_filter_bank(cat, cat_docs, ens, PipelineConfig())
        assert set(bank.tags) == above
        assert len(above) >= 0.9 * len(vocab)


def test_random_tables_and_oov():
    records, tables = generate_synthetic(n_categories=3, docs_per_category=4, random_tables=(1,),
                                         oov_rate=0.3, seed=5)
    labels = {r.category for r in records}
    assert all(lab in t for t in tables for lab in labels)
    assert len(tables[0]) < 3 * 20 + 60


@pytest.mark.parametrize("bad", [dict(tightness=1.0), dict(tightness=0.0), dict(noise_rate=1.0),
                                 dict(n_categories=0), dict(dim=8, n_categories=8),
                                 dict(random_tables=(3,))])
def test_invalid_params(bad):
    with pytest.raises(ValueError):
        SyntheticParams(**bad)
