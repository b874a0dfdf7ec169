"""Pipeline stages, artifact formats, and run configuration.

Every stage reads the sealed artifacts of the stages before it and writes
a versioned artifact of its own, so ``cape all`` and running the stages
one by one produce identical files.  All artifact bytes are deterministic:
keys are sorted, floats round-trip through ``repr``, and nothing
time-dependent is written.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, fields, replace
from pathlib import Path

try:
    import tomllib
except ImportError:                       # Python 3.10
    import tomli as tomllib

from . import relevance as rel
from .attribution import (CtaTtpMatrix, build_matrix, cross_validate,
                          save_model, train)
from .attribution.persist import load_model
from .cooccur import CoOccurrenceGraph, build_graph, pattern_transactions
from .corpus import Corpus, load_jsonl
from .errors import ConfigError, StateError
from .fpgrowth import mine_frequent_itemsets
from .ranking import KeywordRanker
from .topics import ClusteringReport, KernelConfig, TopicCluster, TopicDetector

MODEL_ALIASES = {
    "nb": "naive_bayes", "dt": "decision_tree", "rf": "random_forest",
    "knn": "knn", "mlp": "neural_net",
    "naive_bayes": "naive_bayes", "decision_tree": "decision_tree",
    "random_forest": "random_forest", "neural_net": "neural_net",
}


@dataclass(frozen=True)
class PipelineConfig:
    """Effective configuration of one pipeline run.

    Unset fields take these defaults; the file form groups them into
    sections per stage, and command-line flags override file values.
    """

    corpus_path: str | None = None
    taxonomy_path: str | None = None
    stemming: bool = False
    output_dir: str = "cape-out"
    min_df: int = 3
    idf_mode: str = "literal"
    top_terms: int = 500
    min_edge: int = 1
    word_min_support: int = 2
    pattern_min_support: int = 2
    bandwidth: float | None = None     # None selects the median heuristic
    tolerance: float = 1e-6
    max_iter: int = 200
    tau: float = 0.15
    align_threshold: float = 0.25
    model: str = "naive_bayes"
    k_folds: int = 10
    seed: int = 0

    @property
    def model_kind(self) -> str:
        kind = MODEL_ALIASES.get(self.model)
        if kind is None:
            raise ConfigError(f"unknown model {self.model!r}; expected one of "
                              f"{sorted(set(MODEL_ALIASES))}")
        return kind


_SECTIONS = {
    "corpus": ("corpus_path", "taxonomy_path", "stemming"),
    "rank": ("min_df", "idf_mode"),
    "graph": ("top_terms", "min_edge", "word_min_support"),
    "cluster": ("bandwidth", "tolerance", "max_iter"),
    "relevance": ("tau", "align_threshold"),
    "attribution": ("model", "k_folds", "pattern_min_support"),
    "run": ("seed", "output_dir"),
}


def config_from_file(path) -> PipelineConfig:
    try:
        with open(path, "rb") as handle:
            data = tomllib.load(handle)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    values = {}
    known = {f.name for f in fields(PipelineConfig)}
    for section, keys in _SECTIONS.items():
        for key, value in data.get(section, {}).items():
            if key not in keys:
                raise ConfigError(f"{path}: unknown key {key!r} in [{section}]")
            values[key] = value
    for key in data:
        if key not in _SECTIONS:
            raise ConfigError(f"{path}: unknown section [{key}]")
    if values.get("bandwidth") == "auto":
        values["bandwidth"] = None
    assert set(values) <= known
    return PipelineConfig(**values)


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    return json.dumps(value)


def config_to_toml(config: PipelineConfig) -> str:
    lines = []
    for section, keys in _SECTIONS.items():
        lines.append(f"[{section}]")
        for key in keys:
            value = getattr(config, key)
            if value is None:
                value = "auto" if key == "bandwidth" else ""
            lines.append(f"{key} = {_toml_value(value)}")
        lines.append("")
    return "\n".join(lines)


def apply_overrides(config: PipelineConfig, overrides: dict) -> PipelineConfig:
    clean = {k: v for k, v in overrides.items() if v is not None}
    if clean.get("bandwidth") == "auto":
        clean["bandwidth"] = None
    return replace(config, **clean)


# ---------------------------------------------------------------------------
# Artifact paths and shared I/O
# ---------------------------------------------------------------------------

ARTIFACTS = {
    "corpus": "corpus.snapshot.jsonl",
    "scores": "scores.csv",
    "edges": "edges.csv",
    "graph": "graph.json",
    "clusters": "clusters.json",
    "alignments": "alignments.json",
    "matrix": "matrix.csv",
    "matrix_meta": "matrix_meta.json",
    "model": "model.json",
    "eval": "eval.json",
    "config": "config.echo.toml",
}


def artifact_path(config: PipelineConfig, name: str) -> Path:
    return Path(config.output_dir) / ARTIFACTS[name]


def _require(config: PipelineConfig, name: str, stage: str) -> Path:
    path = artifact_path(config, name)
    if not path.exists():
        raise StateError(f"missing artifact {path}; run `cape {stage}` first")
    return path


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, sort_keys=True, indent=1)
        handle.write("\n")


def _read_json(path: Path, expected_format: str) -> dict:
    with open(path, "r", encoding="utf-8") as handle:
        data = json.load(handle)
    if data.get("format") != expected_format:
        raise StateError(f"{path} is not a {expected_format} artifact")
    return data


class RunLock:
    """One pipeline run per output directory."""

    def __init__(self, output_dir):
        self.path = Path(output_dir) / ".cape.lock"
        self._fd = None

    def __enter__(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        try:
            self._fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise StateError(f"{self.path} exists: another run owns this "
                             "output directory (delete the lock if stale)")
        os.write(self._fd, str(os.getpid()).encode())
        return self

    def __exit__(self, *exc):
        if self._fd is not None:
            os.close(self._fd)
            self.path.unlink(missing_ok=True)
        return False


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------

def echo_config(config: PipelineConfig) -> None:
    Path(config.output_dir).mkdir(parents=True, exist_ok=True)
    path = artifact_path(config, "config")
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(config_to_toml(config))


def stage_ingest(config: PipelineConfig) -> Corpus:
    if not config.corpus_path:
        raise ConfigError("no corpus path configured")
    corpus = load_jsonl(config.corpus_path, stemming=config.stemming)
    out = artifact_path(config, "corpus")
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as handle:
        handle.write(json.dumps({"format": "cape-corpus/1",
                                 "documents": corpus.corpus_size(),
                                 "stemming": corpus.stemming},
                                sort_keys=True))
        handle.write("\n")
        for doc in corpus.documents():
            record = {"id": doc.doc_id, "source": doc.source,
                      "date": doc.published_date.isoformat()
                              if doc.published_date else None,
                      "actor": doc.actor_label, "text": doc.text}
            handle.write(json.dumps(record, sort_keys=True))
            handle.write("\n")
    return corpus


def load_corpus_artifact(config: PipelineConfig) -> Corpus:
    path = _require(config, "corpus", "ingest")
    with open(path, "r", encoding="utf-8") as handle:
        header = json.loads(handle.readline())
        if header.get("format") != "cape-corpus/1":
            raise StateError(f"{path} is not a cape-corpus/1 artifact")
        corpus = Corpus(stemming=bool(header.get("stemming", False)))
        for line in handle:
            if line.strip():
                corpus.ingest(json.loads(line))
    return corpus.seal()


def stage_rank(config: PipelineConfig) -> None:
    corpus = load_corpus_artifact(config)
    ranker = KeywordRanker(corpus, min_df=config.min_df, idf_mode=config.idf_mode)
    ranked = ranker.top_keywords(len(corpus.vocabulary()))
    out = artifact_path(config, "scores")
    with open(out, "w", encoding="utf-8", newline="") as handle:
        handle.write("# format: cape-scores/1\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["term", "total_score", "doc_frequency"])
        for score in ranked:
            writer.writerow([score.term, repr(score.total_score),
                             score.doc_frequency])


def load_scores_artifact(config: PipelineConfig) -> dict:
    path = _require(config, "scores", "rank")
    with open(path, "r", encoding="utf-8") as handle:
        first = handle.readline().strip()
        if first != "# format: cape-scores/1":
            raise StateError(f"{path} is not a cape-scores/1 artifact")
        reader = csv.DictReader(handle)
        return {row["term"]: float(row["total_score"]) for row in reader}


def top_terms_from_scores(scores: dict, limit: int) -> list:
    ranked = sorted(scores, key=lambda t: (-scores[t], t))
    return ranked[:limit]


def stage_graph(config: PipelineConfig) -> None:
    corpus = load_corpus_artifact(config)
    scores = load_scores_artifact(config)
    vocab = top_terms_from_scores(scores, config.top_terms)
    graph = build_graph(corpus, vocab, min_edge=config.min_edge)

    with open(artifact_path(config, "edges"), "w", encoding="utf-8",
              newline="") as handle:
        handle.write("# format: cape-edges/1\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["source", "target", "sigma"])
        for s, t, sigma in graph.edge_rows():
            writer.writerow([s, t, sigma])

    _write_json(artifact_path(config, "graph"), {
        "format": "cape-graph/1",
        "min_edge": config.min_edge,
        "nodes": sorted(graph.nodes),
        "edges": [[s, t, sigma] for s, t, sigma in graph.edge_rows()],
    })


def load_graph_artifact(config: PipelineConfig) -> CoOccurrenceGraph:
    data = _read_json(_require(config, "graph", "graph"), "cape-graph/1")
    nodes = frozenset(data["nodes"])
    edges = {(s, t): sigma for s, t, sigma in data["edges"]}
    adjacency = {term: set() for term in nodes}
    for (s, t) in edges:
        adjacency[s].add(t)
        adjacency[t].add(s)
    return CoOccurrenceGraph(
        nodes=nodes, edges=edges,
        adjacency={t: frozenset(n) for t, n in adjacency.items()})


def stage_cluster(config: PipelineConfig) -> None:
    corpus = load_corpus_artifact(config)
    scores = load_scores_artifact(config)
    graph = load_graph_artifact(config)
    detector = TopicDetector(corpus, graph, scores,
                             KernelConfig(bandwidth=config.bandwidth))
    clusters, report = detector.detect_topics(tolerance=config.tolerance,
                                              max_iterations=config.max_iter)
    _write_json(artifact_path(config, "clusters"), {
        "format": "cape-clusters/1",
        "bandwidth": detector.bandwidth,
        "report": {"iterations_run": report.iterations_run,
                   "converged": report.converged,
                   "max_delta_final": report.max_delta_final,
                   "K": report.K},
        "clusters": [{
            "cluster_id": c.cluster_id,
            "medoid_term": c.medoid_term,
            "rank": c.rank,
            "membership_of_word": c.membership_of_word,
            "word_given_cluster": c.word_given_cluster,
            "top_words": [[w, v] for w, v in c.top_words(20)],
        } for c in clusters],
    })


def load_clusters_artifact(config: PipelineConfig):
    data = _read_json(_require(config, "clusters", "cluster"), "cape-clusters/1")
    clusters = [TopicCluster(
        cluster_id=c["cluster_id"],
        medoid_term=c["medoid_term"],
        membership_of_word=c["membership_of_word"],
        word_given_cluster=c["word_given_cluster"],
        rank=c["rank"],
    ) for c in data["clusters"]]
    report = ClusteringReport(**data["report"])
    return clusters, report


def stage_align(config: PipelineConfig) -> None:
    clusters, _ = load_clusters_artifact(config)
    taxonomy = rel.load_taxonomy(config.taxonomy_path)
    name_by_id = {e.ttp_id: e.name for e in taxonomy}
    entries = []
    for cluster in clusters:
        aligned = rel.align_to_taxonomy(cluster, taxonomy,
                                        threshold=config.align_threshold)
        if aligned is None:
            entries.append({"cluster_id": cluster.cluster_id,
                            "pattern_id": f"C{cluster.cluster_id:03d}",
                            "ttp_id": None, "score": None,
                            "name": cluster.medoid_term})
        else:
            ttp_id, score = aligned
            entries.append({"cluster_id": cluster.cluster_id,
                            "pattern_id": ttp_id, "ttp_id": ttp_id,
                            "score": score, "name": name_by_id[ttp_id]})
    _write_json(artifact_path(config, "alignments"), {
        "format": "cape-alignments/1",
        "threshold": config.align_threshold,
        "alignments": entries,
    })


def load_alignments_artifact(config: PipelineConfig) -> list:
    data = _read_json(_require(config, "alignments", "align"),
                      "cape-alignments/1")
    return data["alignments"]


def compute_transactions(config: PipelineConfig, corpus=None, clusters=None,
                         alignments=None, scores=None):
    """Pattern transactions for every document, from sealed artifacts."""
    corpus = corpus or load_corpus_artifact(config)
    if clusters is None:
        clusters, _ = load_clusters_artifact(config)
    alignments = alignments or load_alignments_artifact(config)
    scores = scores or load_scores_artifact(config)
    pattern_ids = {a["cluster_id"]: a["pattern_id"] for a in alignments}
    relevances = rel.all_doc_relevances(corpus, clusters, scores)
    transactions = pattern_transactions(relevances, pattern_ids, config.tau)
    return corpus, clusters, pattern_ids, relevances, transactions


def stage_matrix(config: PipelineConfig) -> None:
    corpus, _, pattern_ids, _, transactions = compute_transactions(config)
    matrix = build_matrix(corpus, transactions,
                          feature_ids=sorted(set(pattern_ids.values())),
                          min_rows=config.k_folds)
    with open(artifact_path(config, "matrix"), "w", encoding="utf-8",
              newline="") as handle:
        handle.write(matrix.to_csv())
    meta = matrix.meta()
    frequent = mine_frequent_itemsets(
        [sorted(t) for t in transactions.values() if t],
        config.pattern_min_support)
    meta["frequent_pattern_sets"] = [
        {"items": sorted(fi.items), "support": fi.support} for fi in frequent]
    _write_json(artifact_path(config, "matrix_meta"), meta)


def load_matrix_artifact(config: PipelineConfig) -> CtaTtpMatrix:
    path = _require(config, "matrix", "matrix")
    meta_path = artifact_path(config, "matrix_meta")
    meta = None
    if meta_path.exists():
        with open(meta_path, "r", encoding="utf-8") as handle:
            meta = json.load(handle)
    with open(path, "r", encoding="utf-8") as handle:
        return CtaTtpMatrix.from_csv(handle.read(), meta)


def stage_train(config: PipelineConfig) -> None:
    matrix = load_matrix_artifact(config)
    model = train(config.model_kind, matrix, seed=config.seed)
    save_model(model, artifact_path(config, "model"))


def load_model_artifact(config: PipelineConfig):
    _require(config, "model", "train")
    return load_model(artifact_path(config, "model"))


def stage_eval(config: PipelineConfig) -> None:
    matrix = load_matrix_artifact(config)
    report = cross_validate(config.model_kind, matrix, k=config.k_folds,
                            seed=config.seed)
    _write_json(artifact_path(config, "eval"), report.to_dict())


ALL_STAGES = ("ingest", "rank", "graph", "cluster", "align", "matrix",
              "train", "eval")

_STAGE_FUNCS = {
    "ingest": stage_ingest,
    "rank": stage_rank,
    "graph": stage_graph,
    "cluster": stage_cluster,
    "align": stage_align,
    "matrix": stage_matrix,
    "train": stage_train,
    "eval": stage_eval,
}


def run_stage(name: str, config: PipelineConfig) -> None:
    with RunLock(config.output_dir):
        echo_config(config)
        _STAGE_FUNCS[name](config)


def run_all(config: PipelineConfig) -> None:
    with RunLock(config.output_dir):
        echo_config(config)
        for name in ALL_STAGES:
            _STAGE_FUNCS[name](config)


# ---------------------------------------------------------------------------
# In-memory analysis (used by the HTTP service; no artifacts touched)
# ---------------------------------------------------------------------------

def analyze(config: PipelineConfig, corpus: Corpus | None = None,
            taxonomy=None) -> dict:
    """Run the whole pipeline in memory and return every product.

    The result dict carries: corpus, taxonomy, scores, graph, bandwidth,
    clusters, report, alignments (artifact-shaped dicts), pattern_ids,
    relevances, transactions, matrix (``None`` without labeled documents),
    and models (the configured kind, when a matrix exists).
    """
    if corpus is None:
        if not config.corpus_path:
            raise ConfigError("no corpus path configured")
        corpus = load_jsonl(config.corpus_path, stemming=config.stemming)
    if taxonomy is None:
        taxonomy = rel.load_taxonomy(config.taxonomy_path)

    ranker = KeywordRanker(corpus, min_df=config.min_df,
                           idf_mode=config.idf_mode)
    scores = ranker.all_scores()
    vocab = top_terms_from_scores(scores, config.top_terms)
    graph = build_graph(corpus, vocab, min_edge=config.min_edge)
    detector = TopicDetector(corpus, graph, scores,
                             KernelConfig(bandwidth=config.bandwidth))
    clusters, report = detector.detect_topics(tolerance=config.tolerance,
                                              max_iterations=config.max_iter)

    name_by_id = {e.ttp_id: e.name for e in taxonomy}
    alignments = []
    for cluster in clusters:
        aligned = rel.align_to_taxonomy(cluster, taxonomy,
                                        threshold=config.align_threshold)
        if aligned is None:
            alignments.append({"cluster_id": cluster.cluster_id,
                               "pattern_id": f"C{cluster.cluster_id:03d}",
                               "ttp_id": None, "score": None,
                               "name": cluster.medoid_term})
        else:
            ttp_id, score = aligned
            alignments.append({"cluster_id": cluster.cluster_id,
                               "pattern_id": ttp_id, "ttp_id": ttp_id,
                               "score": score, "name": name_by_id[ttp_id]})

    pattern_ids = {a["cluster_id"]: a["pattern_id"] for a in alignments}
    relevances = rel.all_doc_relevances(corpus, clusters, scores)
    transactions = pattern_transactions(relevances, pattern_ids, config.tau)

    matrix = None
    models = {}
    if corpus.labeled_documents():
        matrix = build_matrix(corpus, transactions,
                              feature_ids=sorted(set(pattern_ids.values())),
                              min_rows=config.k_folds)
        models[config.model_kind] = train(config.model_kind, matrix,
                                          seed=config.seed)
    return {
        "corpus": corpus, "taxonomy": taxonomy, "scores": scores,
        "graph": graph, "bandwidth": detector.bandwidth,
        "clusters": clusters, "report": report, "alignments": alignments,
        "pattern_ids": pattern_ids, "relevances": relevances,
        "transactions": transactions, "matrix": matrix, "models": models,
    }
