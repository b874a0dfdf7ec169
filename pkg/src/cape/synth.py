"""Synthetic CTI corpora with planted actor/pattern/keyword structure.

Each actor owns a fixed set of patterns; each pattern owns a disjoint
keyword vocabulary whose first word (the anchor) appears in every document
about that pattern.  Documents focus on exactly one pattern, so with zero
noise the keyword communities stay disjoint and recoverable.  A matching
taxonomy file and a ground-truth manifest are emitted for oracle checks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError

_SOURCES = (
    "us-cert portal",
    "security blog",
    "security vendor",
    "security news website",
    "ioc miner",
    "security research website",
    "cybersecurity expert forum",
)


@dataclass(frozen=True)
class SynthConfig:
    actors: int
    patterns_per_actor: int
    docs_per_pattern: int
    vocab_per_pattern: int = 8
    noise_rate: float = 0.0
    noise_vocab: int = 30
    start_year: int = 2012
    end_year: int = 2022
    seed: int = 0

    def __post_init__(self):
        if self.actors < 1:
            raise ConfigError("at least one actor is required")
        if self.patterns_per_actor < 1 or self.docs_per_pattern < 1:
            raise ConfigError("patterns_per_actor and docs_per_pattern must be >= 1")
        if self.vocab_per_pattern < 2:
            raise ConfigError("vocab_per_pattern must be >= 2")
        if not 0.0 <= self.noise_rate <= 1.0:
            raise ConfigError("noise_rate must lie in [0, 1]")
        if self.end_year < self.start_year:
            raise ConfigError("end_year must not precede start_year")


@dataclass
class SynthResult:
    records: list
    taxonomy: list
    manifest: dict

    def write(self, outdir) -> dict:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        corpus_path = outdir / "corpus.jsonl"
        with open(corpus_path, "w", encoding="utf-8") as handle:
            for record in self.records:
                handle.write(json.dumps(record, sort_keys=True))
                handle.write("\n")
        taxonomy_path = outdir / "taxonomy.json"
        with open(taxonomy_path, "w", encoding="utf-8") as handle:
            json.dump(self.taxonomy, handle, sort_keys=True, indent=1)
            handle.write("\n")
        manifest_path = outdir / "truth.json"
        with open(manifest_path, "w", encoding="utf-8") as handle:
            json.dump(self.manifest, handle, sort_keys=True, indent=1)
            handle.write("\n")
        return {"corpus": str(corpus_path), "taxonomy": str(taxonomy_path),
                "truth": str(manifest_path)}


def _pattern_id(p: int) -> str:
    return f"T9{p + 1:03d}"


def generate(config: SynthConfig) -> SynthResult:
    rng = np.random.default_rng(config.seed)
    n_patterns = config.actors * config.patterns_per_actor

    keywords = {}
    for p in range(n_patterns):
        keywords[p] = [f"p{p:03d}w{i:02d}" for i in range(config.vocab_per_pattern)]
    noise_words = [f"noise{i:03d}" for i in range(config.noise_vocab)]

    years = list(range(config.start_year, config.end_year + 1))
    records = []
    doc_truth = {}
    doc_index = 0
    for a in range(config.actors):
        actor = f"actor{a + 1:02d}"
        for j in range(config.patterns_per_actor):
            p = a * config.patterns_per_actor + j
            vocab = keywords[p]
            for occurrence in range(config.docs_per_pattern):
                # The anchor opens every document about its pattern and
                # appears more often than any other word, making it the
                # unique density peak of the keyword community.  Every
                # non-anchor word skips at least one of the pattern's
                # documents so no word can clone the anchor's document set.
                tokens = [vocab[0]] * 3
                for i, word in enumerate(vocab[1:]):
                    if occurrence == i % config.docs_per_pattern:
                        continue
                    if rng.random() < 0.6:
                        tokens.extend([word] * int(rng.integers(1, 3)))
                if config.noise_rate > 0:
                    tokens = [
                        (noise_words[int(rng.integers(0, len(noise_words)))]
                         if rng.random() < config.noise_rate else tok)
                        for tok in tokens
                    ]
                rng.shuffle(tokens)
                doc_id = f"{actor}-d{j * config.docs_per_pattern + occurrence + 1:03d}"
                year = years[doc_index % len(years)]
                record = {
                    "id": doc_id,
                    "source": _SOURCES[doc_index % len(_SOURCES)],
                    "date": (f"{year:04d}-{1 + doc_index % 12:02d}-"
                             f"{1 + doc_index % 28:02d}"),
                    "actor": actor,
                    "text": " ".join(tokens),
                }
                records.append(record)
                doc_truth[doc_id] = _pattern_id(p)
                doc_index += 1

    taxonomy = []
    patterns_meta = {}
    word_truth = {}
    for p in range(n_patterns):
        pid = _pattern_id(p)
        actor = f"actor{p // config.patterns_per_actor + 1:02d}"
        taxonomy.append({
            "ttp_id": pid,
            "name": f"Synthetic Pattern {p + 1:03d}",
            "keywords": [{"term": w, "weight": 1.0} for w in keywords[p]],
        })
        patterns_meta[pid] = {"actor": actor, "anchor": keywords[p][0],
                              "keywords": keywords[p]}
        for w in keywords[p]:
            word_truth[w] = pid

    manifest = {
        "format": "cape-synth/1",
        "params": {
            "actors": config.actors,
            "patterns_per_actor": config.patterns_per_actor,
            "docs_per_pattern": config.docs_per_pattern,
            "vocab_per_pattern": config.vocab_per_pattern,
            "noise_rate": config.noise_rate,
            "noise_vocab": config.noise_vocab,
            "seed": config.seed,
        },
        "patterns": patterns_meta,
        "doc_truth": doc_truth,
        "word_truth": word_truth,
        "noise_words": noise_words,
    }
    return SynthResult(records=records, taxonomy=taxonomy, manifest=manifest)
