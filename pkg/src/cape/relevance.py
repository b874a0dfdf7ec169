"""Document relevance, taxonomy alignment, actor ranking, and timelines.

Everything here reads immutable clustering output; all functions are pure
and safe for concurrent callers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from .corpus import Corpus
from .errors import ConfigError, DegenerateDataError, UnknownIdError
from .topics import TopicCluster, cosine


@dataclass(frozen=True)
class TaxonomyEntry:
    """One technique of the pattern taxonomy, with a weighted lexicon."""

    ttp_id: str
    name: str
    lexicon: dict   # term -> positive weight

    def __post_init__(self):
        if not self.lexicon:
            raise ConfigError(f"taxonomy entry {self.ttp_id} has an empty lexicon")
        if any(w <= 0 for w in self.lexicon.values()):
            raise ConfigError(f"taxonomy entry {self.ttp_id} has nonpositive weights")


def load_taxonomy(path=None) -> list:
    """Load taxonomy entries from JSON (defaults to the bundled fixture).

    The file is a list of ``{ttp_id, name, keywords: [{term, weight}]}``.
    """
    if path is None:
        raw = resources.files("cape.data").joinpath("taxonomy_fixture.json").read_text("utf-8")
    else:
        with open(path, "r", encoding="utf-8") as handle:
            raw = handle.read()
    data = json.loads(raw)
    entries = []
    seen = set()
    for item in data:
        ttp_id = item["ttp_id"]
        if ttp_id in seen:
            raise ConfigError(f"duplicate ttp_id {ttp_id} in taxonomy")
        seen.add(ttp_id)
        lexicon = {kw["term"].lower(): float(kw["weight"])
                   for kw in item["keywords"]}
        entries.append(TaxonomyEntry(ttp_id=ttp_id, name=item["name"],
                                     lexicon=lexicon))
    return entries


@dataclass(frozen=True)
class DocTopicRelevance:
    """Per-document relevance distribution over clusters.

    ``per_cluster`` is empty (and ``eligible`` false) when the document
    shares no words with the clustered vocabulary; such documents are
    excluded from retrieval.
    """

    doc_id: str
    per_cluster: dict = field(default_factory=dict)

    @property
    def eligible(self) -> bool:
        return bool(self.per_cluster)


def doc_topic_relevance(corpus: Corpus, clusters, scores: dict,
                        doc_id: str) -> DocTopicRelevance:
    """Relevance of one document to every cluster.

    Each cluster's share is the importance- and membership-weighted count
    of the document's clustered words, normalized over clusters so the
    row sums to one.
    """
    doc = corpus.document(doc_id)
    weights = {}
    for cluster in clusters:
        total = 0.0
        for term, member in cluster.membership_of_word.items():
            n = corpus.term_frequency(term, doc_id)
            if n:
                total += n * member * scores.get(term, 0.0)
        weights[cluster.cluster_id] = total
    denom = sum(weights.values())
    if denom <= 0:
        return DocTopicRelevance(doc_id=doc_id, per_cluster={})
    return DocTopicRelevance(
        doc_id=doc_id,
        per_cluster={k: v / denom for k, v in weights.items()},
    )


def all_doc_relevances(corpus: Corpus, clusters, scores: dict) -> dict:
    """doc_id -> {cluster_id: relevance} for every eligible document."""
    out = {}
    for doc_id in corpus.doc_ids():
        rel = doc_topic_relevance(corpus, clusters, scores, doc_id)
        out[doc_id] = rel.per_cluster
    return out


def topic_top_docs(corpus: Corpus, clusters, cluster_id: int,
                   limit: int | None = None) -> list:
    """Documents ranked for one cluster; ties break by ascending doc id.

    A document's score is the average, over its tokens, of the cluster's
    word distribution at each token: length-normalized so long documents
    gain nothing for free.
    """
    by_id = {c.cluster_id: c for c in clusters}
    if cluster_id not in by_id:
        raise UnknownIdError(f"unknown cluster {cluster_id}", [cluster_id])
    cluster = by_id[cluster_id]
    scored = []
    for doc in corpus.documents():
        if doc.token_count == 0:
            scored.append((doc.doc_id, 0.0))
            continue
        total = 0.0
        for term, weight in cluster.word_given_cluster.items():
            n = corpus.term_frequency(term, doc.doc_id)
            if n:
                total += n * weight
        scored.append((doc.doc_id, total / doc.token_count))
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    if limit is not None:
        scored = scored[:limit]
    return scored


def align_to_taxonomy(cluster: TopicCluster, taxonomy,
                      threshold: float = 0.25):
    """Best-matching taxonomy entry for a cluster, or ``None``.

    Compares the cluster's word distribution against each entry's lexicon
    by cosine similarity and returns ``(ttp_id, score)`` for the argmax
    when it reaches ``threshold``.
    """
    if not taxonomy:
        raise DegenerateDataError("taxonomy is empty")
    best_id, best_score = None, -1.0
    for entry in sorted(taxonomy, key=lambda e: e.ttp_id):
        score = cosine(cluster.word_given_cluster, entry.lexicon)
        if score > best_score:
            best_id, best_score = entry.ttp_id, score
    if best_score >= threshold:
        return best_id, best_score
    return None


def cluster_pattern_ids(clusters, alignments: dict) -> dict:
    """cluster_id -> pattern id (aligned TTP id, else a cluster label)."""
    ids = {}
    for cluster in clusters:
        aligned = alignments.get(cluster.cluster_id)
        if aligned is not None:
            ids[cluster.cluster_id] = aligned[0]
        else:
            ids[cluster.cluster_id] = f"C{cluster.cluster_id:03d}"
    return ids


@dataclass(frozen=True)
class ActorScore:
    actor: str
    score: float
    supporting_docs: tuple


@dataclass(frozen=True)
class ActorRanking:
    query_patterns: frozenset
    ranked_actors: tuple


def rank_actors(corpus: Corpus, transactions: dict, known_patterns,
                query) -> ActorRanking:
    """Rank actors by the share of their documents exhibiting the query.

    An actor's score is the number of its labeled documents whose pattern
    transaction contains every queried pattern, divided by the actor's
    labeled document count; the empty query therefore scores 1 for every
    actor.  Ties break by ascending actor name.
    """
    query = frozenset(query)
    unknown = sorted(query - frozenset(known_patterns))
    if unknown:
        raise UnknownIdError(f"unknown pattern ids: {', '.join(unknown)}",
                             unknown)
    per_actor_docs = {}
    for doc in corpus.labeled_documents():
        per_actor_docs.setdefault(doc.actor_label, []).append(doc.doc_id)

    ranked = []
    for actor, doc_ids in per_actor_docs.items():
        supporting = [d for d in sorted(doc_ids)
                      if query <= transactions.get(d, frozenset())]
        ranked.append(ActorScore(actor=actor,
                                 score=len(supporting) / len(doc_ids),
                                 supporting_docs=tuple(supporting)))
    ranked.sort(key=lambda a: (-a.score, a.actor))
    return ActorRanking(query_patterns=query, ranked_actors=tuple(ranked))


@dataclass(frozen=True)
class Timeline:
    ttp_id: str
    granularity: str
    periods: tuple          # ((period label, count), ...) spanning the corpus
    excluded_undated: int


def _period_key(date, granularity):
    if granularity == "year":
        return f"{date.year:04d}"
    return f"{date.year:04d}-{date.month:02d}"


def _iter_periods(start, end, granularity):
    if granularity == "year":
        for year in range(start.year, end.year + 1):
            yield f"{year:04d}"
        return
    year, month = start.year, start.month
    while (year, month) <= (end.year, end.month):
        yield f"{year:04d}-{month:02d}"
        month += 1
        if month > 12:
            year, month = year + 1, 1


def pattern_timeline(corpus: Corpus, transactions: dict, known_patterns,
                     ttp_id: str, granularity: str = "year") -> Timeline:
    """Per-period counts of documents exhibiting a pattern.

    Zero-count periods inside the corpus date span are included; undated
    documents are skipped and reported in ``excluded_undated``.
    """
    if granularity not in ("year", "month"):
        raise ConfigError(f"granularity must be 'year' or 'month', got {granularity!r}")
    if ttp_id not in frozenset(known_patterns):
        raise UnknownIdError(f"unknown pattern id: {ttp_id}", [ttp_id])

    dated = [d for d in corpus.documents() if d.published_date is not None]
    excluded = corpus.corpus_size() - len(dated)
    if not dated:
        return Timeline(ttp_id=ttp_id, granularity=granularity, periods=(),
                        excluded_undated=excluded)

    start = min(d.published_date for d in dated)
    end = max(d.published_date for d in dated)
    counts = {p: 0 for p in _iter_periods(start, end, granularity)}
    for doc in dated:
        if ttp_id in transactions.get(doc.doc_id, frozenset()):
            counts[_period_key(doc.published_date, granularity)] += 1
    return Timeline(
        ttp_id=ttp_id,
        granularity=granularity,
        periods=tuple(sorted(counts.items())),
        excluded_undated=excluded,
    )
