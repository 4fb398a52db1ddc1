import json

import pytest

from tagsem import cli
from tagsem.classifier import load_model, train
from tagsem.corpus import load_corpus, preprocess_all
from tagsem.embeddings import EmbeddingEnsemble, load_table
from tagsem.evaluation import evaluate, load_report, load_splits
from tagsem.features import extract_matrix, feature_matrix, load_features
from tagsem.filterbank import PipelineConfig, dump_codebook, load_codebook
from tagsem.evaluation import build_split_codebook


def run(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("synth")
    assert run("synth", "--out-dir", d, "--categories", "3", "--docs-per-category", "30",
               "--vocab-per-category", "10", "--dim", "12", "--tags-per-doc", "20", "--seed", "4") == 0
    return d


def emb_args(d):
    return [x for name in ("emba", "embb", "embc") for x in ("--embedding", d / f"{name}.txt")]


def last_error(capsys):
    lines = capsys.readouterr().err.strip().splitlines()
    assert len(lines) == 1
    return json.loads(lines[0])


def test_help_lists_flags(capsys):
    with pytest.raises(SystemExit) as exc:
        run("eval", "--help")
    assert exc.value.code == 0
    out = capsys.readouterr().out
    for flag in ("--delta", "--threshold-t", "--top-n", "--gamma", "--c-penalty", "--seed", "--jobs"):
        assert flag in out
    assert "0.5" in out and "1e-05" in out


def test_pipeline_matches_library(synth_dir, tmp_path):
    d = synth_dir
    cb_path, feat_path, model_path = tmp_path / "cb.json", tmp_path / "f.csv", tmp_path / "m.json"
    assert run("build-bank", "--corpus", d / "corpus.jsonl", *emb_args(d), "--out", cb_path) == 0
    assert run("extract", "--corpus", d / "corpus.jsonl", "--codebook", cb_path, *emb_args(d),
               "--out", feat_path) == 0
    assert run("train", "--features", feat_path, "--out", model_path) == 0
    assert run("predict", "--model", model_path, "--features", feat_path, "--out", tmp_path / "p.csv") == 0

    docs = preprocess_all(load_corpus(d / "corpus.jsonl"))
    ens = EmbeddingEnsemble(tuple(load_table(d / f"{n}.txt") for n in ("emba", "embb", "embc")))
    cb = build_split_codebook(docs, ens, PipelineConfig())
    assert cb_path.read_text() == dump_codebook(cb)
    assert load_codebook(cb_path) == cb
    fvs = extract_matrix(docs, cb, ens, 0.4)
    assert load_features(feat_path) == fvs
    model = train(feature_matrix(fvs), [f.category for f in fvs], C=50.0, gamma=1e-5)
    loaded = load_model(model_path)
    assert loaded.predict(feature_matrix(fvs)) == model.predict(feature_matrix(fvs))
    rows = (tmp_path / "p.csv").read_text().splitlines()
    assert rows[0] == "image_id,category,predicted" and len(rows) == len(docs) + 1


def test_eval_and_ablations(synth_dir, tmp_path):
    d = synth_dir
    common = ["--corpus", d / "corpus.jsonl", *emb_args(d), "--n-sets", "2", "--train-per-category", "15",
              "--seed", "1"]
    assert run("eval", *common, "--out", tmp_path / "e.csv", "--save-splits", tmp_path / "s.csv") == 0
    report = load_report(tmp_path / "e.csv")
    docs = preprocess_all(load_corpus(d / "corpus.jsonl"))
    ens = EmbeddingEnsemble(tuple(load_table(d / f"{n}.txt") for n in ("emba", "embb", "embc")))
    expected = evaluate(docs, ens, PipelineConfig(), load_splits(tmp_path / "s.csv"))
    assert report.rows[0].accuracies == expected.accuracies

    assert run("ablate-threshold", *common, "--thresholds", "0.3,0.9", "--out", tmp_path / "t.csv") == 0
    assert [r.setting for r in load_report(tmp_path / "t.csv").rows] == ["0.3", "0.9"]
    assert run("ablate-embeddings", *common, "--out", tmp_path / "a.csv") == 0
    assert [r.setting for r in load_report(tmp_path / "a.csv").rows] == ["emba", "embb", "embc", "averaged"]
    assert run("eval", "--corpus", d / "corpus.jsonl", *emb_args(d), "--splits", tmp_path / "s.csv",
               "--out", tmp_path / "e2.csv") == 0
    assert (tmp_path / "e2.csv").read_text() == (tmp_path / "e.csv").read_text()


def test_delta_out_of_range_is_usage_error(tmp_path, capsys):
    assert run("build-bank", "--delta", "1.5", "--corpus", "x", "--embedding", "y", "--out", tmp_path / "z") == 2
    assert last_error(capsys)["error"] == "usage"
    assert run("no-such-command") == 2
    capsys.readouterr()
    assert run("extract", "--corpus", "x") == 2


def test_codebook_embedding_mismatch(synth_dir, tmp_path, capsys):
    d = synth_dir
    cb_path = tmp_path / "cb.json"
    assert run("build-bank", "--corpus", d / "corpus.jsonl", *emb_args(d), "--out", cb_path) == 0
    other = tmp_path / "other"
    assert run("synth", "--out-dir", other, "--categories", "2", "--docs-per-category", "3", "--dim", "5",
               "--seed", "99") == 0
    out = tmp_path / "f.csv"
    code = run("extract", "--corpus", d / "corpus.jsonl", "--codebook", cb_path, *emb_args(other), "--out", out)
    assert code == 3
    err = last_error(capsys)
    assert err["error"] == "data" and err["path"] == str(cb_path)
    assert not out.exists()


def test_malformed_embedding_file(synth_dir, tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("a 1 2\nb 1\n")
    code = run("eval", "--corpus", synth_dir / "corpus.jsonl", "--embedding", bad, "--out", tmp_path / "r.csv")
    assert code == 3
    err = last_error(capsys)
    assert err["path"] == str(bad) and "line 2" in err["message"]
    assert not (tmp_path / "r.csv").exists()


def test_oov_category_is_infeasible(tmp_path, capsys):
    corpus = tmp_path / "c.jsonl"
    corpus.write_text(json.dumps({"image_id": "a", "category": "zebra", "tags": ["cat"]}) + "\n")
    emb = tmp_path / "e.txt"
    emb.write_text("cat 1 0\n")
    assert run("build-bank", "--corpus", corpus, "--embedding", emb, "--out", tmp_path / "cb.json") == 4
    assert last_error(capsys)["error"] == "infeasible"
    assert not (tmp_path / "cb.json").exists()


def test_predict_dimension_mismatch(synth_dir, tmp_path, capsys):
    feats = tmp_path / "f.csv"
    feats.write_text("image_id,category,f_0,f_1\na,x,1,0\nb,y,0,1\n")
    assert run("train", "--features", feats, "--out", tmp_path / "m.json") == 0
    wide = tmp_path / "w.csv"
    wide.write_text("image_id,category,f_0,f_1,f_2\na,x,1,0,0\n")
    assert run("predict", "--model", tmp_path / "m.json", "--features", wide, "--out", tmp_path / "p.csv") == 3
    assert last_error(capsys)["path"] == str(wide)


def test_missing_corpus(tmp_path, capsys):
    assert run("eval", "--corpus", tmp_path / "none.jsonl", "--embedding", tmp_path / "e.txt",
               "--out", tmp_path / "r.csv") == 3
    assert "not found" in last_error(capsys)["message"]
