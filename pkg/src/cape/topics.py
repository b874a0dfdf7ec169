"""Non-parametric medoid-seeking topic detection.

Keywords live in a distance space derived from their document sets; a
Gaussian kernel accumulates importance-weighted density at every word, and
the strict local maxima of that density over the co-occurrence neighborhood
become the cluster medoids.  The cluster count is whatever the data yields.
Membership is soft: each word carries a probability distribution over
clusters (``m(cluster | word)``), and each cluster carries a distribution
over words (``m(word | cluster)``).  Both are refined by the iterative
density/rank updates until the word-given-cluster distribution stops
changing.

All operations are deterministic: no randomness enters anywhere, so equal
inputs and configuration always reproduce identical distributions.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .cooccur import CoOccurrenceGraph
from .corpus import Corpus
from .errors import ConfigError, DegenerateDataError, UnknownIdError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class KernelConfig:
    """Gaussian kernel profile exp(-d^2 / (2 h^2)) with bandwidth ``h``.

    ``bandwidth`` of ``None`` selects the data-driven default: the median
    of all nonzero pairwise word distances.  ``self_weight_included``
    controls whether a word's own unit kernel value enters density sums.
    """

    bandwidth: float | None = None
    self_weight_included: bool = True

    def __post_init__(self):
        if self.bandwidth is not None and self.bandwidth <= 0:
            raise ConfigError(f"bandwidth must be > 0, got {self.bandwidth}")

    def profile(self, d: float, h: float) -> float:
        return math.exp(-(d * d) / (2.0 * h * h))


@dataclass(frozen=True)
class TopicCluster:
    """One detected attack-pattern theme."""

    cluster_id: int
    medoid_term: str
    membership_of_word: dict    # word -> m(cluster | word)
    word_given_cluster: dict    # word -> m(word | cluster)
    rank: float
    aligned_ttp: tuple | None = None   # (ttp_id, score) once aligned

    def top_words(self, limit: int = 20) -> list:
        ranked = sorted(self.word_given_cluster.items(),
                        key=lambda kv: (-kv[1], kv[0]))
        return ranked[:limit]


@dataclass(frozen=True)
class ClusteringReport:
    iterations_run: int
    converged: bool
    max_delta_final: float
    K: int


def standardize_over_words(T: np.ndarray, previous: np.ndarray) -> np.ndarray:
    """Per-cluster word distribution: each row of T normalized over words.

    A cluster whose densities sum to zero keeps its previous row.
    """
    T = np.asarray(T, dtype=float)
    row_sums = T.sum(axis=1, keepdims=True)
    dead = row_sums[:, 0] == 0
    if dead.any():
        logger.warning("clusters %s have zero total density; keeping their "
                       "previous word distributions",
                       np.flatnonzero(dead).tolist())
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(row_sums > 0, T / row_sums, previous)


def cluster_rank(membership: np.ndarray, pi: np.ndarray) -> np.ndarray:
    """Importance of each cluster: membership-weighted keyword scores."""
    return np.asarray(membership, dtype=float) @ np.asarray(pi, dtype=float)


def standardize_over_clusters(word_given: np.ndarray,
                              previous: np.ndarray) -> np.ndarray:
    """Per-word cluster memberships: columns normalized across clusters.

    Works on the standardized densities (the per-cluster word
    distributions), so a cluster's raw scale and rank cancel before
    clusters compete for a word.  A word that no cluster reaches keeps its
    previous membership column.
    """
    word_given = np.asarray(word_given, dtype=float)
    col_sums = word_given.sum(axis=0, keepdims=True)
    dead = col_sums[0] == 0
    if dead.any():
        logger.warning("%d words receive zero density from every cluster; "
                       "keeping their previous memberships", int(dead.sum()))
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(col_sums > 0, word_given / col_sums, previous)


def importance_mass(scores) -> np.ndarray:
    """Normalize a nonnegative score vector into a probability mass."""
    vec = np.asarray(scores, dtype=float)
    if vec.size == 0:
        raise DegenerateDataError("no scores to normalize")
    if np.any(vec < 0):
        raise ValueError("importance scores must be nonnegative")
    total = vec.sum()
    if total <= 0:
        raise DegenerateDataError("all importance scores are zero")
    return vec / total


def topic_similarity(a: TopicCluster, b: TopicCluster) -> float:
    """Cosine similarity of two word-given-cluster distributions."""
    return cosine(a.word_given_cluster, b.word_given_cluster)


def cosine(vec_a: dict, vec_b: dict) -> float:
    norm_a = math.sqrt(sum(v * v for v in vec_a.values()))
    norm_b = math.sqrt(sum(v * v for v in vec_b.values()))
    if norm_a == 0 or norm_b == 0:
        raise DegenerateDataError("cosine of a zero vector is undefined")
    shared = set(vec_a) & set(vec_b)
    dot = sum(vec_a[w] * vec_b[w] for w in shared)
    return dot / (norm_a * norm_b)


class TopicDetector:
    """Binds a sealed corpus, its co-occurrence graph, and keyword scores.

    The vocabulary is the graph's node set in sorted order; distances are
    Jaccard distances over per-term document sets, bounded in [0, 1].
    """

    def __init__(self, corpus: Corpus, graph: CoOccurrenceGraph, scores: dict,
                 kernel: KernelConfig | None = None):
        self.corpus = corpus
        self.graph = graph
        self.kernel = kernel or KernelConfig()
        self.terms = sorted(graph.nodes)
        if not self.terms:
            raise DegenerateDataError("empty vocabulary")
        self._index = {t: i for i, t in enumerate(self.terms)}
        self.pi = np.array([float(scores.get(t, 0.0)) for t in self.terms])
        self.masses = importance_mass(self.pi)
        self.distances = self._distance_matrix()
        self.bandwidth = (self.kernel.bandwidth
                          if self.kernel.bandwidth is not None
                          else self._median_bandwidth())
        self.kernel_matrix = np.exp(
            -(self.distances ** 2) / (2.0 * self.bandwidth ** 2))
        # Distance 1 means zero shared documents: no co-occurrence evidence
        # links the pair, so it contributes no density, mirroring how the
        # graph neighborhood already excludes such pairs.
        self.kernel_matrix[self.distances >= 1.0] = 0.0
        if not self.kernel.self_weight_included:
            np.fill_diagonal(self.kernel_matrix, 0.0)

    # -- geometry --------------------------------------------------------

    def _distance_matrix(self) -> np.ndarray:
        doc_order = {d: i for i, d in enumerate(self.corpus.doc_ids())}
        incidence = np.zeros((len(self.terms), len(doc_order)))
        for i, term in enumerate(self.terms):
            for doc_id in self.corpus.term_doc_ids(term):
                incidence[i, doc_order[doc_id]] = 1.0
        inter = incidence @ incidence.T
        sizes = incidence.sum(axis=1).astype(float)
        union = sizes[:, None] + sizes[None, :] - inter
        with np.errstate(invalid="ignore", divide="ignore"):
            dist = 1.0 - np.where(union > 0, inter / union, 0.0)
        np.fill_diagonal(dist, 0.0)
        return dist

    def _median_bandwidth(self) -> float:
        # Scatter is estimated from co-occurring pairs only: pairs at
        # distance exactly 1 share no document and would saturate the
        # median at the metric's ceiling.  Half the median keeps the
        # kernel thin at large distances, so loosely connected words
        # cannot out-dense the core of a tight keyword community.
        upper = self.distances[np.triu_indices(len(self.terms), k=1)]
        informative = upper[(upper > 0) & (upper < 1)]
        if informative.size == 0:
            nonzero = upper[upper > 0]
            return float(np.median(nonzero)) if nonzero.size else 1.0
        return float(np.median(informative)) / 2.0

    def term_distance(self, term_i: str, term_j: str) -> float:
        """Jaccard distance of the two terms' document sets."""
        for term in (term_i, term_j):
            if term not in self._index:
                raise UnknownIdError(f"unknown term {term!r}", [term])
        return float(self.distances[self._index[term_i], self._index[term_j]])

    # -- density and medoids ----------------------------------------------

    def densities(self) -> np.ndarray:
        """Accumulated kernel density at every word."""
        return self.kernel_matrix @ self.masses

    def accumulate_density(self, term: str) -> float:
        if term not in self._index:
            raise UnknownIdError(f"unknown term {term!r}", [term])
        return float(self.densities()[self._index[term]])

    def find_medoids(self) -> list:
        """Terms whose density strictly exceeds every graph neighbor's.

        Isolated nodes qualify vacuously.  When plateaus leave no strict
        local maximum at all, the single globally densest term (ties by
        ascending term) is promoted so at least one medoid exists.
        """
        f = self.densities()
        medoids = []
        for term in self.terms:
            i = self._index[term]
            neighbors = self.graph.adjacency.get(term, frozenset())
            if all(f[i] > f[self._index[n]] for n in neighbors):
                medoids.append(term)
        if not medoids:
            top = f.max()
            candidates = sorted(t for t in self.terms
                                if f[self._index[t]] == top)
            medoids = [candidates[0]]
            logger.warning("no strict local density maximum; promoted %r",
                           candidates[0])
        medoids.sort(key=lambda t: (-f[self._index[t]], t))
        return medoids

    # -- membership ---------------------------------------------------------

    def init_membership(self, medoids) -> np.ndarray:
        """Distance-based initial m(cluster | word), columns sum to 1.

        A word at distance 1 from every medoid gets a uniform row instead
        of the undefined 0/0 ratio.
        """
        if not medoids:
            raise ConfigError("at least one medoid is required")
        rows = np.array([1.0 - self.distances[self._index[m]] for m in medoids])
        denom = rows.sum(axis=0)
        K = len(medoids)
        with np.errstate(invalid="ignore", divide="ignore"):
            member = np.where(denom > 0, rows / denom, 1.0 / K)
        return member

    def cluster_density_matrix(self, membership: np.ndarray,
                               rank: np.ndarray) -> np.ndarray:
        """Total density contribution T[k, j] under the given memberships."""
        return rank[:, None] * (membership @ self.kernel_matrix)

    def cluster_density(self, membership: np.ndarray, rank: np.ndarray,
                        k: int, term: str) -> float:
        """T_k at one word, for the given memberships and ranks."""
        if term not in self._index:
            raise UnknownIdError(f"unknown term {term!r}", [term])
        T = self.cluster_density_matrix(membership, rank)
        return float(T[k, self._index[term]])

    # -- the iterative loop ---------------------------------------------------

    def detect_topics(self, tolerance: float = 1e-6, max_iterations: int = 200,
                      iteration_hook=None):
        """Run the full detection loop; returns (clusters, report).

        Each round recomputes cluster densities from the start-of-round
        memberships and ranks, standardizes them over words into the
        word-given-cluster distribution, updates cluster ranks (rescaled
        to mean 1 so the rank factor cannot drift the overall scale), and
        then renormalizes the standardized densities across clusters into
        the new cluster-given-word memberships.  Comparing clusters via
        their standardized densities keeps the loop stable: a cluster's
        raw scale and rank cancel before clusters compete for a word, so
        no cluster can snowball and starve the others.  The loop stops
        when the word-given-cluster distribution changes by at most
        ``tolerance`` anywhere, or after ``max_iterations`` rounds.
        """
        if tolerance < 0:
            raise ConfigError("tolerance must be >= 0")
        if max_iterations < 1:
            raise ConfigError("max_iterations must be >= 1")

        medoids = self.find_medoids()
        K, V = len(medoids), len(self.terms)
        member = self.init_membership(medoids)       # m(cluster | word), K x V
        rank = np.ones(K)
        word_given = np.full((K, V), 1.0 / V)        # uninformed starting point
        delta = math.inf
        converged = False
        iterations = 0

        for iterations in range(1, max_iterations + 1):
            T = self.cluster_density_matrix(member, rank)
            new_word_given = standardize_over_words(T, word_given)

            new_rank = cluster_rank(member, self.pi)
            mean_rank = new_rank.mean()
            if mean_rank > 0:
                new_rank = new_rank / mean_rank
            else:
                logger.warning("all cluster ranks collapsed to zero; keeping "
                               "previous ranks")
                new_rank = rank

            new_member = standardize_over_clusters(new_word_given, member)

            delta = float(np.max(np.abs(new_word_given - word_given)))
            member, word_given, rank = new_member, new_word_given, new_rank
            if iteration_hook is not None:
                iteration_hook(iterations, member.copy(), word_given.copy(),
                               rank.copy())
            if delta <= tolerance:
                converged = True
                break

        clusters = []
        for k, medoid in enumerate(medoids):
            clusters.append(TopicCluster(
                cluster_id=k,
                medoid_term=medoid,
                membership_of_word={t: float(member[k, i])
                                    for i, t in enumerate(self.terms)},
                word_given_cluster={t: float(word_given[k, i])
                                    for i, t in enumerate(self.terms)},
                rank=float(rank[k]),
            ))
        report = ClusteringReport(iterations_run=iterations, converged=converged,
                                  max_delta_final=delta, K=K)
        return clusters, report
