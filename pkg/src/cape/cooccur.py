"""Keyword co-occurrence graph and pattern transactions.

Two terms are linked iff they appear together in at least one document;
the edge strength is the exact count of such documents.  The adjacency
sets double as the neighborhood structure used by medoid detection.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import combinations

from .corpus import Corpus
from .errors import ConfigError, StateError, UnknownIdError


@dataclass(frozen=True)
class CoOccurrenceGraph:
    """Undirected term graph with document-count edge weights."""

    nodes: frozenset
    edges: dict          # (term_s, term_t) with s < t -> sigma
    adjacency: dict      # term -> frozenset of neighbors

    def sigma(self, s: str, t: str) -> int:
        if s == t:
            return 0
        key = (s, t) if s < t else (t, s)
        return self.edges.get(key, 0)

    def neighbors(self, term: str) -> frozenset:
        if term not in self.nodes:
            raise UnknownIdError(f"term {term!r} is not in the graph", [term])
        return self.adjacency.get(term, frozenset())

    def edge_rows(self) -> list:
        """Sorted (source, target, sigma) rows for export."""
        return [(s, t, w) for (s, t), w in sorted(self.edges.items())]


def build_graph(corpus: Corpus, vocabulary, min_edge: int = 1) -> CoOccurrenceGraph:
    """Count pairwise document co-occurrence over ``vocabulary``.

    Every vocabulary term becomes a node even when isolated; edges with
    strength below ``min_edge`` are pruned.
    """
    if not corpus.sealed:
        raise StateError("graph construction requires a sealed corpus")
    if min_edge < 1:
        raise ConfigError(f"min_edge must be >= 1, got {min_edge}")
    vocab = frozenset(vocabulary)
    counts = Counter()
    for doc in corpus.documents():
        present = sorted(vocab.intersection(doc.tokens))
        for pair in combinations(present, 2):
            counts[pair] += 1

    edges = {pair: sigma for pair, sigma in counts.items() if sigma >= min_edge}
    adjacency = {term: set() for term in vocab}
    for (s, t) in edges:
        adjacency[s].add(t)
        adjacency[t].add(s)
    return CoOccurrenceGraph(
        nodes=vocab,
        edges=dict(sorted(edges.items())),
        adjacency={term: frozenset(nbrs) for term, nbrs in adjacency.items()},
    )


def pattern_transactions(relevances, cluster_patterns: dict, tau: float) -> dict:
    """Binarize per-document topic relevance into pattern-id transactions.

    ``relevances`` maps doc_id -> {cluster_id: relevance}; every document
    gets a transaction (possibly empty) holding the pattern ids of clusters
    whose relevance is >= ``tau``.  Clusters sharing a pattern id merge.
    """
    if relevances is None:
        raise StateError("run topic detection and relevance scoring first")
    if not 0.0 <= tau <= 1.0:
        raise ConfigError(f"tau must lie in [0, 1], got {tau}")
    transactions = {}
    for doc_id, per_cluster in relevances.items():
        chosen = {cluster_patterns[k] for k, rel in per_cluster.items() if rel >= tau}
        transactions[doc_id] = frozenset(chosen)
    return transactions
