"""Modified TF-IDF keyword ranking.

A term's per-document score is the product of its in-document frequency,
a document-frequency factor, and a rarity weight that damps terms seen in
fewer than ``min_df`` documents.  The per-document scores sum to the term's
total score, which drives keyword selection and the importance masses used
by topic detection.

Two document-frequency modes exist:

* ``literal`` (default): n(wd) / Nd, the ratio as printed in the method
  this package implements.
* ``classic``: log((1 + Nd) / (1 + n(wd))), the conventional smoothed
  inverse document frequency, for users who want ubiquitous words damped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .corpus import Corpus
from .errors import ConfigError, StateError

IDF_MODES = ("literal", "classic")


def rarity_weight(n_wd: int, min_df: int) -> float:
    """Weight in (0, 1] that shrinks terms seen in < ``min_df`` documents.

    Returns 1 when ``n_wd >= min_df``, else ``n_wd / min_df``; both
    branches agree at the threshold, so the weight is continuous there.
    """
    if min_df < 1:
        raise ConfigError(f"min_df must be >= 1, got {min_df}")
    if n_wd < 0:
        raise ValueError(f"document count must be >= 0, got {n_wd}")
    if n_wd >= min_df:
        return 1.0
    return n_wd / min_df


@dataclass(frozen=True)
class KeywordScore:
    term: str
    per_doc_score: dict = field(default_factory=dict)
    total_score: float = 0.0
    rarity_weight: float = 0.0
    doc_frequency: int = 0


class KeywordRanker:
    """Scores terms of a sealed corpus; pure reads, safe to share."""

    def __init__(self, corpus: Corpus, min_df: int = 3, idf_mode: str = "literal"):
        if not corpus.sealed:
            raise StateError("keyword ranking requires a sealed corpus")
        if min_df < 1:
            raise ConfigError(f"min_df must be >= 1, got {min_df}")
        if idf_mode not in IDF_MODES:
            raise ConfigError(f"idf_mode must be one of {IDF_MODES}, got {idf_mode!r}")
        self.corpus = corpus
        self.min_df = min_df
        self.idf_mode = idf_mode

    def _df_factor(self, n_wd: int) -> float:
        nd = self.corpus.corpus_size()
        if n_wd == 0 or nd == 0:
            return 0.0
        if self.idf_mode == "literal":
            return n_wd / nd
        return math.log((1 + nd) / (1 + n_wd))

    def score_term_doc(self, term: str, doc_id: str) -> float:
        """Per-document score: fr(dc, wd) x df-factor x rarity weight."""
        fr = self.corpus.term_frequency(term, doc_id)
        if fr == 0:
            return 0.0
        n_wd = self.corpus.term_stats(term).doc_frequency
        return fr * self._df_factor(n_wd) * rarity_weight(n_wd, self.min_df)

    def total_score(self, term: str) -> float:
        """Total score: sum of the per-document scores over the corpus."""
        stats = self.corpus.term_stats(term)
        if stats.doc_frequency == 0:
            return 0.0
        factor = self._df_factor(stats.doc_frequency) * rarity_weight(
            stats.doc_frequency, self.min_df)
        return factor * sum(stats.per_doc_frequency.values())

    def keyword_score(self, term: str) -> KeywordScore:
        stats = self.corpus.term_stats(term)
        weight = rarity_weight(stats.doc_frequency, self.min_df)
        factor = self._df_factor(stats.doc_frequency) * weight
        per_doc = {doc_id: fr * factor
                   for doc_id, fr in sorted(stats.per_doc_frequency.items())}
        return KeywordScore(
            term=term,
            per_doc_score=per_doc,
            total_score=sum(per_doc.values()),
            rarity_weight=weight,
            doc_frequency=stats.doc_frequency,
        )

    def all_scores(self) -> dict:
        """Map term -> total score for the whole vocabulary."""
        return {term: self.total_score(term) for term in self.corpus.vocabulary()}

    def top_keywords(self, limit: int) -> list:
        """Highest-scoring keywords, ties broken by ascending term."""
        if limit <= 0:
            return []
        ranked = sorted(self.corpus.vocabulary(),
                        key=lambda t: (-self.total_score(t), t))
        return [self.keyword_score(term) for term in ranked[:limit]]
