import numpy as np
import pytest

from tagsem.corpus import preprocess_all
from tagsem.embeddings import EmbeddingEnsemble, EmbeddingTable
from tagsem.synthetic import generate_synthetic

# Event8-style corpus: 8 categories x 130 documents.
EVENT8 = dict(n_categories=8, docs_per_category=130, tightness=0.9, noise_rate=0.1, seed=0)

# Large flat vocabularies and four-tag documents: exact word matches are rare,
# so only similarity-based matching (moderate T) generalizes.
HARD = dict(n_categories=8, docs_per_category=130, vocab_per_category=800, tags_per_doc=4,
            noise_rate=0.25, tightness=0.8, zipf=0.0, seed=1)


def table(name, entries):
    return EmbeddingTable.from_dict(name, {k: np.asarray(v, dtype=float) for k, v in entries.items()})


@pytest.fixture(scope="session")
def event8():
    records, tables = generate_synthetic(**EVENT8)
    return preprocess_all(records), tables


@pytest.fixture(scope="session")
def event8_ensemble(event8):
    return EmbeddingEnsemble(event8[1])


@pytest.fixture(scope="session")
def small_corpus():
    records, tables = generate_synthetic(n_categories=3, docs_per_category=20, vocab_per_category=12,
                                         dim=16, tags_per_doc=25, noise_rate=0.2, seed=5)
    return preprocess_all(records), EmbeddingEnsemble(tables)


_acceptance = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))
    elif report.when == "setup" and report.outcome != "passed" and "test_acceptance.py" in report.nodeid:
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
