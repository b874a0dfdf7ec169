import pytest

from cape.corpus import Corpus

_ACCEPTANCE_RESULTS = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        status = "PASS" if report.passed else ("FAIL" if report.failed else "SKIP")
        _ACCEPTANCE_RESULTS.append((status, name))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for status, name in _ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"[{status}] {name}")


def corpus_from(records) -> Corpus:
    corpus = Corpus()
    for record in records:
        corpus.ingest(record)
    return corpus.seal()


@pytest.fixture
def tiny_corpus():
    """Three short reports over a small shared vocabulary."""
    return corpus_from([
        {"id": "d1", "text": "mimikatz mimikatz dumped credentials",
         "date": "2015-03-01", "actor": "apt-a"},
        {"id": "d2", "text": "spear phishing attachment",
         "date": "2016-07-09", "actor": "apt-b"},
        {"id": "d3", "text": "mimikatz credentials exfiltration",
         "date": "2017-11-20", "actor": "apt-a"},
    ])


def random_corpus(rng, max_docs=20, max_vocab=200):
    """Random small corpus for oracle comparisons."""
    n_docs = int(rng.integers(1, max_docs + 1))
    vocab_size = int(rng.integers(2, max_vocab + 1))
    vocab = [f"term{i:03d}" for i in range(vocab_size)]
    records = []
    for d in range(n_docs):
        n_tokens = int(rng.integers(1, 40))
        tokens = [vocab[int(rng.integers(0, vocab_size))] for _ in range(n_tokens)]
        records.append({"id": f"doc{d:03d}", "text": " ".join(tokens)})
    return corpus_from(records)
