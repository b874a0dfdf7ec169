"""The ``cape`` command line: drives the pipeline and queries its artifacts.

Subcommands: ingest, rank, graph, cluster, align, matrix, train, eval,
attribute, actors, docs, timeline, synth, serve, all.  Every subcommand
accepts ``--config`` (a TOML file with one section per stage), ``--output``
(artifact directory), and ``--seed``; flags override file values.  Failures
exit nonzero with a machine-readable JSON error on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import pipeline, relevance as rel
from .attribution.classifiers import predict, vector_from_patterns
from .errors import CapeError
from .synth import SynthConfig, generate


def _add_common(parser):
    parser.add_argument("--config", help="TOML config file")
    parser.add_argument("--output", help="artifact directory")
    parser.add_argument("--seed", type=int, help="master random seed")


def _build_parser():
    parser = argparse.ArgumentParser(prog="cape", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load and index a JSONL corpus")
    p.add_argument("--corpus", help="JSONL corpus path")
    p.add_argument("--stem", action=argparse.BooleanOptionalAction,
                   default=None, help="fold word suffixes during tokenization")
    _add_common(p)

    p = sub.add_parser("rank", help="score keywords")
    p.add_argument("--min-df", type=int, dest="min_df")
    p.add_argument("--idf-mode", choices=("literal", "classic"), dest="idf_mode")
    p.add_argument("--top", type=int, default=None,
                   help="also print the top-k keywords as CSV")
    _add_common(p)

    p = sub.add_parser("graph", help="build the co-occurrence graph")
    p.add_argument("--min-edge", type=int, dest="min_edge")
    p.add_argument("--top-terms", type=int, dest="top_terms")
    _add_common(p)

    p = sub.add_parser("cluster", help="detect attack-pattern topics")
    p.add_argument("--tolerance", type=float)
    p.add_argument("--max-iter", type=int, dest="max_iter")
    p.add_argument("--bandwidth", help="kernel bandwidth or 'auto'")
    _add_common(p)

    p = sub.add_parser("align", help="align clusters to the taxonomy")
    p.add_argument("--taxonomy", help="taxonomy JSON path")
    p.add_argument("--threshold", type=float, dest="align_threshold")
    _add_common(p)

    p = sub.add_parser("matrix", help="build the actor x pattern matrix")
    p.add_argument("--tau", type=float)
    _add_common(p)

    p = sub.add_parser("train", help="fit an attribution model")
    p.add_argument("--model", choices=sorted(set(pipeline.MODEL_ALIASES)))
    _add_common(p)

    p = sub.add_parser("eval", help="cross-validate the model")
    p.add_argument("--model", choices=sorted(set(pipeline.MODEL_ALIASES)))
    p.add_argument("--k", type=int, dest="k_folds")
    _add_common(p)

    p = sub.add_parser("attribute", help="attribute a pattern set")
    p.add_argument("--model", dest="model_path", help="model artifact path")
    p.add_argument("--patterns", required=True,
                   help="comma-separated pattern ids")
    _add_common(p)

    p = sub.add_parser("actors", help="rank actors for a pattern set")
    p.add_argument("--patterns", required=True,
                   help="comma-separated pattern ids")
    _add_common(p)

    p = sub.add_parser("docs", help="top documents of one pattern")
    p.add_argument("--pattern", required=True)
    p.add_argument("--limit", type=int, default=10)
    _add_common(p)

    p = sub.add_parser("timeline", help="pattern usage over time")
    p.add_argument("--pattern", required=True)
    p.add_argument("--granularity", choices=("year", "month"), default="year")
    _add_common(p)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--actors", type=int, required=True)
    p.add_argument("--patterns-per-actor", type=int, required=True)
    p.add_argument("--docs-per-pattern", type=int, required=True)
    p.add_argument("--vocab-per-pattern", type=int, default=8)
    p.add_argument("--noise", type=float, default=0.0)
    _add_common(p)

    p = sub.add_parser("serve", help="serve the analysis over HTTP")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8036)
    p.add_argument("--corpus", help="JSONL corpus path")
    p.add_argument("--taxonomy", help="taxonomy JSON path")
    _add_common(p)

    p = sub.add_parser("all", help="run every stage in order")
    p.add_argument("--corpus", help="JSONL corpus path")
    p.add_argument("--taxonomy", help="taxonomy JSON path")
    p.add_argument("--model", choices=sorted(set(pipeline.MODEL_ALIASES)))
    _add_common(p)

    return parser


def _effective_config(args) -> pipeline.PipelineConfig:
    if getattr(args, "config", None):
        config = pipeline.config_from_file(args.config)
    else:
        config = pipeline.PipelineConfig()
    overrides = {}
    mapping = {
        "corpus": "corpus_path", "taxonomy": "taxonomy_path",
        "output": "output_dir", "seed": "seed", "min_df": "min_df",
        "idf_mode": "idf_mode", "min_edge": "min_edge",
        "top_terms": "top_terms", "tolerance": "tolerance",
        "max_iter": "max_iter", "bandwidth": "bandwidth", "tau": "tau",
        "align_threshold": "align_threshold", "model": "model",
        "k_folds": "k_folds", "stem": "stemming",
    }
    for arg_name, field_name in mapping.items():
        value = getattr(args, arg_name, None)
        if value is not None:
            overrides[field_name] = value
    if isinstance(overrides.get("bandwidth"), str) and \
            overrides["bandwidth"] != "auto":
        overrides["bandwidth"] = float(overrides["bandwidth"])
    env_dir = os.environ.get("CAPE_DATA_DIR")
    if "output_dir" not in overrides and env_dir:
        overrides["output_dir"] = env_dir
    return pipeline.apply_overrides(config, overrides)


def _print_json(payload) -> None:
    json.dump(payload, sys.stdout, sort_keys=True, indent=1)
    sys.stdout.write("\n")


def _cmd_rank(config, args) -> None:
    pipeline.run_stage("rank", config)
    if args.top is not None:
        scores = pipeline.load_scores_artifact(config)
        corpus = pipeline.load_corpus_artifact(config)
        sys.stdout.write("term,total_score,doc_frequency\n")
        for term in pipeline.top_terms_from_scores(scores, args.top):
            df = corpus.term_stats(term).doc_frequency
            sys.stdout.write(f"{term},{scores[term]!r},{df}\n")


def _cmd_attribute(config, args) -> None:
    if args.model_path:
        from .attribution.persist import load_model
        model = load_model(args.model_path)
    else:
        model = pipeline.load_model_artifact(config)
    patterns = [p for p in args.patterns.split(",") if p]
    vector = vector_from_patterns(model.feature_schema, patterns)
    actor, ranked = predict(model, vector)
    _print_json({"actor": actor,
                 "scores": [{"actor": a, "score": s} for a, s in ranked]})


def _cmd_actors(config, args) -> None:
    corpus, _, pattern_ids, _, transactions = \
        pipeline.compute_transactions(config)
    patterns = {p for p in args.patterns.split(",") if p}
    ranking = rel.rank_actors(corpus, transactions,
                              set(pattern_ids.values()), patterns)
    _print_json({"patterns": sorted(ranking.query_patterns),
                 "actors": [{"actor": a.actor, "score": a.score,
                             "supporting_docs": list(a.supporting_docs)}
                            for a in ranking.ranked_actors]})


def _cmd_docs(config, args) -> None:
    corpus, clusters, pattern_ids, _, _ = pipeline.compute_transactions(config)
    matching = [k for k, pid in pattern_ids.items() if pid == args.pattern]
    if not matching:
        raise CapeError(f"unknown pattern id: {args.pattern}")
    cluster_id = max(matching, key=lambda k: clusters[k].rank)
    ranked = rel.topic_top_docs(corpus, clusters, cluster_id,
                                limit=args.limit)
    _print_json({"pattern": args.pattern,
                 "documents": [{"doc_id": d, "score": s} for d, s in ranked]})


def _cmd_timeline(config, args) -> None:
    corpus, _, pattern_ids, _, transactions = \
        pipeline.compute_transactions(config)
    timeline = rel.pattern_timeline(corpus, transactions,
                                    set(pattern_ids.values()),
                                    args.pattern, args.granularity)
    _print_json({"pattern": timeline.ttp_id,
                 "granularity": timeline.granularity,
                 "periods": [[p, c] for p, c in timeline.periods],
                 "excluded_undated": timeline.excluded_undated})


def _cmd_synth(config, args) -> None:
    synth_config = SynthConfig(
        actors=args.actors,
        patterns_per_actor=args.patterns_per_actor,
        docs_per_pattern=args.docs_per_pattern,
        vocab_per_pattern=args.vocab_per_pattern,
        noise_rate=args.noise,
        seed=config.seed,
    )
    paths = generate(synth_config).write(config.output_dir)
    _print_json(paths)


def _cmd_serve(config, args) -> None:
    import uvicorn
    from .service import create_app
    app = create_app(config, build_on_startup=True)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _effective_config(args)
        command = args.command
        if command in ("ingest", "graph", "cluster", "align", "matrix",
                       "train", "eval"):
            pipeline.run_stage(command, config)
        elif command == "rank":
            _cmd_rank(config, args)
        elif command == "all":
            pipeline.run_all(config)
        elif command == "attribute":
            _cmd_attribute(config, args)
        elif command == "actors":
            _cmd_actors(config, args)
        elif command == "docs":
            _cmd_docs(config, args)
        elif command == "timeline":
            _cmd_timeline(config, args)
        elif command == "synth":
            _cmd_synth(config, args)
        elif command == "serve":
            _cmd_serve(config, args)
        else:                                    # pragma: no cover
            raise CapeError(f"unhandled command {command!r}")
    except CapeError as exc:
        json.dump({"error": {"code": type(exc).__name__, "message": str(exc)}},
                  sys.stderr)
        sys.stderr.write("\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
