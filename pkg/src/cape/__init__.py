"""CAPE: attack-pattern mining and threat-actor attribution from CTI text.

The package turns a corpus of unstructured threat-intelligence reports
into ranked keywords, a co-occurrence graph, soft keyword clusters that
act as attack patterns, an actor-versus-pattern boolean matrix, and
trained attribution models, and serves the results to an interactive
explorer over HTTP.
"""

from .corpus import Corpus, Document, TermStats, load_jsonl, preprocess
from .ranking import KeywordRanker, KeywordScore, rarity_weight
from .cooccur import CoOccurrenceGraph, build_graph, pattern_transactions
from .fpgrowth import FrequentItemset, mine_frequent_itemsets
from .topics import (ClusteringReport, KernelConfig, TopicCluster,
                     TopicDetector, topic_similarity)
from .relevance import (ActorRanking, DocTopicRelevance, TaxonomyEntry,
                        Timeline, align_to_taxonomy, doc_topic_relevance,
                        load_taxonomy, pattern_timeline, rank_actors,
                        topic_top_docs)
from .synth import SynthConfig, SynthResult, generate

__version__ = "0.1.0"

__all__ = [
    "Corpus", "Document", "TermStats", "load_jsonl", "preprocess",
    "KeywordRanker", "KeywordScore", "rarity_weight",
    "CoOccurrenceGraph", "build_graph", "pattern_transactions",
    "FrequentItemset", "mine_frequent_itemsets",
    "ClusteringReport", "KernelConfig", "TopicCluster", "TopicDetector",
    "topic_similarity",
    "ActorRanking", "DocTopicRelevance", "TaxonomyEntry", "Timeline",
    "align_to_taxonomy", "doc_topic_relevance", "load_taxonomy",
    "pattern_timeline", "rank_actors", "topic_top_docs",
    "SynthConfig", "SynthResult", "generate",
    "__version__",
]
