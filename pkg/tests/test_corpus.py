import datetime as dt
import json

import pytest
from hypothesis import given, strategies as st

from cape.corpus import Corpus, load_jsonl, parse_date, preprocess
from cape.errors import DocumentError, StateError

from conftest import corpus_from


class TestPreprocess:
    def test_mixed_case_and_hyphen(self):
        assert preprocess("Spear Phishing, spear-phishing!") == [
            "spear", "phishing", "spear", "phishing"]

    def test_stop_words_dropped(self):
        assert preprocess("the and of") == []

    def test_cve_identifier_kept_whole(self):
        assert preprocess("CVE-2017-1000486 exploited") == [
            "cve-2017-1000486", "exploited"]

    def test_single_characters_dropped(self):
        assert preprocess("a b 7 xy") == ["xy"]

    def test_digit_runs_kept_from_two_chars(self):
        assert preprocess("port 443 he 7") == ["port", "443"]

    def test_empty_input(self):
        assert preprocess("") == []

    @given(st.text(max_size=200))
    def test_deterministic(self, text):
        assert preprocess(text) == preprocess(text)


class TestIngest:
    def test_basic_ingest_indexes_tokens(self):
        corpus = Corpus()
        doc_id = corpus.ingest({"id": "d1", "text": "Mimikatz dumped credentials"})
        assert doc_id == "d1"
        assert corpus.document("d1").tokens == ("mimikatz", "dumped", "credentials")
        assert corpus.corpus_size() == 1

    def test_empty_text_rejected(self):
        corpus = Corpus()
        with pytest.raises(DocumentError):
            corpus.ingest({"id": "d1", "text": ""})
        with pytest.raises(DocumentError):
            corpus.ingest({"id": "d2", "text": "   "})

    def test_reingest_identical_is_noop(self):
        corpus = Corpus()
        record = {"id": "d1", "text": "Mimikatz dumped credentials"}
        corpus.ingest(record)
        before = corpus.term_stats("mimikatz")
        corpus.ingest(dict(record))
        assert corpus.corpus_size() == 1
        assert corpus.term_stats("mimikatz") == before

    def test_duplicate_id_different_content_rejected(self):
        corpus = Corpus()
        corpus.ingest({"id": "d1", "text": "alpha beta"})
        with pytest.raises(DocumentError):
            corpus.ingest({"id": "d1", "text": "gamma delta"})

    def test_generated_ids_are_unique(self):
        corpus = Corpus()
        first = corpus.ingest({"text": "alpha beta"})
        second = corpus.ingest({"text": "gamma delta"})
        assert first != second

    def test_sealed_corpus_rejects_ingest(self):
        corpus = Corpus()
        corpus.ingest({"id": "d1", "text": "alpha beta"})
        corpus.seal()
        with pytest.raises(StateError):
            corpus.ingest({"id": "d2", "text": "gamma"})

    def test_unparseable_date_rejected(self):
        corpus = Corpus()
        with pytest.raises(DocumentError):
            corpus.ingest({"id": "d1", "text": "alpha", "date": "not-a-date"})


class TestTermStats:
    def test_counts_match_example(self):
        corpus = corpus_from([
            {"id": "d1", "text": "malware malware dropper"},
            {"id": "d2", "text": "phishing lure"},
            {"id": "d3", "text": "malware beacon"},
        ])
        stats = corpus.term_stats("malware")
        assert stats.doc_frequency == 2
        assert stats.per_doc_frequency == {"d1": 2, "d3": 1}

    def test_unknown_term_empty_stats(self, tiny_corpus):
        stats = tiny_corpus.term_stats("zzz")
        assert stats.doc_frequency == 0
        assert stats.per_doc_frequency == {}

    def test_corpus_size(self, tiny_corpus):
        assert tiny_corpus.corpus_size() == 3

    def test_token_sum_invariant(self, tiny_corpus):
        for doc in tiny_corpus.documents():
            total = sum(tiny_corpus.term_frequency(t, doc.doc_id)
                        for t in set(doc.tokens))
            assert total == doc.token_count


class TestDates:
    def test_none_stays_none(self):
        assert parse_date(None) is None

    def test_datetime_truncated_to_day(self):
        assert parse_date("2021-05-04T13:22:01+05:00") == dt.date(2021, 5, 4)

    def test_plain_date(self):
        assert parse_date("2012-05-30") == dt.date(2012, 5, 30)


class TestJsonl:
    def test_load_and_alias_fold(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        rows = [
            {"id": "d1", "source": "blog", "date": "2014-01-02",
             "actor": "Comment Crew", "text": "mimikatz usage observed"},
            {"id": "d2", "source": "vendor", "date": None, "actor": None,
             "text": "spear phishing attachment"},
        ]
        path.write_text("\n".join(json.dumps(r) for r in rows))
        corpus = load_jsonl(path, alias_map={"Comment Crew": "APT1"})
        assert corpus.sealed
        assert corpus.document("d1").actor_label == "APT1"
        assert corpus.document("d2").published_date is None
        assert corpus.actors() == ["APT1"]

    def test_invalid_json_line(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text("{not json}\n")
        with pytest.raises(DocumentError):
            load_jsonl(path)


class TestStemming:
    def test_off_by_default(self):
        assert preprocess("attackers attacking") == ["attackers", "attacking"]

    def test_suffix_folding(self):
        got = preprocess("attackers attacking attacked attacks", stemming=True)
        assert got == ["attacker", "attack", "attack", "attack"]

    def test_identifiers_untouched(self):
        got = preprocess("CVE-2017-1000486 443 processes", stemming=True)
        assert got[0] == "cve-2017-1000486"
        assert "443" in got

    def test_corpus_flag_applies(self):
        corpus = Corpus(stemming=True)
        corpus.ingest({"id": "d1", "text": "dumping credentials repeatedly"})
        assert corpus.document("d1").tokens == ("dump", "credential",
                                                "repeatedly")
