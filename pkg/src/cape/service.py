"""Read-only HTTP interface over a sealed analysis snapshot.

Every response is served from one immutable :class:`IndexSnapshot` and
echoes its ``build_id``; a background reindex builds a fresh snapshot and
swaps it in atomically, so readers never observe a half-built index.  The
only mutation endpoint is ``POST /admin/reindex``, guarded by a
single-builder rule (a second call while building is rejected with 409).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse

from . import relevance as rel
from .attribution.classifiers import predict, vector_from_patterns
from .errors import CapeError, UnknownIdError
from .pipeline import MODEL_ALIASES, PipelineConfig, analyze
from .topics import topic_similarity

SIMILARITY_CUTOFF = 0.2
DEFAULT_PAGE_LIMIT = 50


@dataclass(frozen=True)
class IndexSnapshot:
    """Immutable products of one pipeline run, plus a build identifier."""

    build_id: int
    corpus: object
    taxonomy: list
    scores: dict
    clusters: list
    alignments: list
    pattern_ids: dict          # cluster_id -> pattern id
    transactions: dict
    matrix: object
    models: dict

    @classmethod
    def from_products(cls, build_id: int, products: dict) -> "IndexSnapshot":
        return cls(
            build_id=build_id,
            corpus=products["corpus"],
            taxonomy=products["taxonomy"],
            scores=products["scores"],
            clusters=products["clusters"],
            alignments=products["alignments"],
            pattern_ids=products["pattern_ids"],
            transactions=products["transactions"],
            matrix=products["matrix"],
            models=products["models"],
        )

    # -- derived views ----------------------------------------------------

    def cluster_for_pattern(self, pattern_id: str):
        best = None
        for entry in self.alignments:
            if entry["pattern_id"] == pattern_id:
                cluster = self.clusters[entry["cluster_id"]]
                if best is None or cluster.rank > best.rank:
                    best = cluster
        return best

    def suggestions(self) -> list:
        by_id = {}
        for entry in self.alignments:
            cluster = self.clusters[entry["cluster_id"]]
            item = {"id": entry["pattern_id"], "name": entry["name"],
                    "rank": cluster.rank}
            known = by_id.get(entry["pattern_id"])
            if known is None or item["rank"] > known["rank"]:
                by_id[entry["pattern_id"]] = item
        aligned_ids = set(by_id)
        for entry in self.taxonomy:
            if entry.ttp_id not in aligned_ids:
                by_id[entry.ttp_id] = {"id": entry.ttp_id, "name": entry.name,
                                       "rank": 0.0}
        return sorted(by_id.values(),
                      key=lambda s: (-s["rank"], s["name"], s["id"]))


class SnapshotHolder:
    """Atomic snapshot reference plus the single background builder."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self._lock = threading.Lock()
        self._snapshot: IndexSnapshot | None = None
        self._building = False
        self._next_build_id = 1
        self.last_error: str | None = None
        self.build_gate: threading.Event | None = None  # ops/test hold point

    @property
    def snapshot(self) -> IndexSnapshot | None:
        return self._snapshot

    @property
    def building(self) -> bool:
        return self._building

    def build_sync(self) -> IndexSnapshot:
        """Build and publish a snapshot on the calling thread."""
        with self._lock:
            build_id = self._next_build_id
            self._next_build_id += 1
            self._building = True
        try:
            products = analyze(self.config)
            snapshot = IndexSnapshot.from_products(build_id, products)
            self._snapshot = snapshot          # atomic reference swap
            self.last_error = None
            return snapshot
        except Exception as exc:
            self.last_error = str(exc)
            raise
        finally:
            self._building = False

    def start_rebuild(self) -> int:
        """Kick off a background rebuild; returns the upcoming build id."""
        with self._lock:
            if self._building:
                raise HTTPException(status_code=409, detail={
                    "code": "rebuild_in_progress",
                    "message": "a rebuild is already running",
                    "details": {}})
            build_id = self._next_build_id
            self._next_build_id += 1
            self._building = True

        def worker():
            try:
                if self.build_gate is not None:
                    self.build_gate.wait()
                products = analyze(self.config)
                self._snapshot = IndexSnapshot.from_products(build_id, products)
                self.last_error = None
            except Exception as exc:     # keep the old snapshot on failure
                self.last_error = str(exc)
            finally:
                self._building = False

        threading.Thread(target=worker, daemon=True).start()
        return build_id


def _error(status: int, code: str, message: str, **details):
    return HTTPException(status_code=status, detail={
        "code": code, "message": message, "details": details})


def create_app(config: PipelineConfig | None = None,
               holder: SnapshotHolder | None = None,
               build_on_startup: bool = False) -> FastAPI:
    """Construct the service; callers own when the first snapshot is built."""
    if holder is None:
        holder = SnapshotHolder(config or PipelineConfig())
    app = FastAPI(title="cape", version="1")
    app.state.holder = holder
    if build_on_startup:
        holder.build_sync()

    @app.exception_handler(HTTPException)
    async def _http_error(request: Request, exc: HTTPException):
        detail = exc.detail
        if not isinstance(detail, dict):
            detail = {"code": str(exc.status_code), "message": str(detail),
                      "details": {}}
        return JSONResponse(status_code=exc.status_code, content=detail)

    def current_snapshot() -> IndexSnapshot:
        snap = holder.snapshot
        if snap is None:
            raise _error(503, "no_snapshot", "no index snapshot is published")
        return snap

    def resolve_pattern(snap: IndexSnapshot, pattern_id: str):
        cluster = snap.cluster_for_pattern(pattern_id)
        if cluster is None:
            raise _error(404, "unknown_pattern",
                         f"unknown pattern id: {pattern_id}",
                         pattern_id=pattern_id)
        return cluster

    def page(items, offset: int, limit: int):
        offset = max(0, offset)
        limit = max(0, limit)
        return items[offset:offset + limit]

    # -- read endpoints ----------------------------------------------------

    @app.get("/suggest")
    def suggest(q: str = ""):
        snap = current_snapshot()
        needle = q.strip().lower()
        matches = [s for s in snap.suggestions()
                   if needle in s["name"].lower() or needle in s["id"].lower()]
        return {"build_id": snap.build_id, "suggestions": matches[:10]}

    @app.get("/patterns/{pattern_id}/graph")
    def pattern_graph(pattern_id: str):
        snap = current_snapshot()
        cluster = resolve_pattern(snap, pattern_id)
        related = []
        for entry in snap.alignments:
            other = snap.clusters[entry["cluster_id"]]
            if other.cluster_id == cluster.cluster_id:
                continue
            sim = topic_similarity(cluster, other)
            if sim >= SIMILARITY_CUTOFF:
                related.append({"pattern_id": entry["pattern_id"],
                                "name": entry["name"],
                                "similarity": sim})
        related.sort(key=lambda r: (-r["similarity"], r["pattern_id"]))
        return {
            "build_id": snap.build_id,
            "pattern": {"id": pattern_id, "medoid": cluster.medoid_term,
                        "rank": cluster.rank},
            "nodes": [{"term": w, "weight": v} for w, v in cluster.top_words(20)],
            "related": related,
        }

    @app.get("/patterns/{pattern_id}/actors")
    def pattern_actors(pattern_id: str, sort: str = "desc", offset: int = 0,
                       limit: int = DEFAULT_PAGE_LIMIT):
        snap = current_snapshot()
        resolve_pattern(snap, pattern_id)
        if sort not in ("asc", "desc"):
            raise _error(400, "bad_sort", "sort must be 'asc' or 'desc'",
                         sort=sort)
        ranking = rel.rank_actors(snap.corpus, snap.transactions,
                                  set(snap.pattern_ids.values()), {pattern_id})
        actors = [{"actor": a.actor, "score": a.score,
                   "supporting_docs": list(a.supporting_docs)}
                  for a in ranking.ranked_actors]
        if sort == "asc":
            actors = actors[::-1]
        return {"build_id": snap.build_id, "total": len(actors),
                "actors": page(actors, offset, limit)}

    @app.get("/patterns/{pattern_id}/documents")
    def pattern_documents(pattern_id: str, offset: int = 0,
                          limit: int = DEFAULT_PAGE_LIMIT):
        snap = current_snapshot()
        cluster = resolve_pattern(snap, pattern_id)
        ranked = rel.topic_top_docs(snap.corpus, snap.clusters,
                                    cluster.cluster_id)
        docs = []
        for doc_id, score in ranked:
            doc = snap.corpus.document(doc_id)
            docs.append({"doc_id": doc_id, "score": score,
                         "source": doc.source,
                         "date": doc.published_date.isoformat()
                                 if doc.published_date else None,
                         "actor": doc.actor_label})
        return {"build_id": snap.build_id, "total": len(docs),
                "documents": page(docs, offset, limit)}

    @app.get("/patterns/{pattern_id}/timeline")
    def pattern_timeline(pattern_id: str, granularity: str = "year"):
        snap = current_snapshot()
        resolve_pattern(snap, pattern_id)
        try:
            timeline = rel.pattern_timeline(snap.corpus, snap.transactions,
                                            set(snap.pattern_ids.values()),
                                            pattern_id, granularity)
        except CapeError as exc:
            raise _error(400, "bad_request", str(exc))
        return {"build_id": snap.build_id, "ttp_id": timeline.ttp_id,
                "granularity": timeline.granularity,
                "periods": [[p, c] for p, c in timeline.periods],
                "excluded_undated": timeline.excluded_undated}

    # -- attribution ---------------------------------------------------------

    @app.post("/attribute")
    def attribute(payload: dict):
        snap = current_snapshot()
        name = MODEL_ALIASES.get(str(payload.get("model", "")).lower())
        model = snap.models.get(name) if name else None
        if model is None:
            raise _error(404, "unknown_model",
                         f"model {payload.get('model')!r} is not in this "
                         "snapshot", available=sorted(snap.models))
        patterns = payload.get("patterns", [])
        try:
            vector = vector_from_patterns(model.feature_schema, patterns)
        except UnknownIdError as exc:
            raise _error(400, "unknown_pattern", str(exc),
                         offenders=list(exc.offenders))
        actor, ranked = predict(model, vector)
        return {"build_id": snap.build_id, "actor": actor,
                "scores": [{"actor": a, "score": s} for a, s in ranked]}

    # -- administration --------------------------------------------------------

    @app.post("/admin/reindex")
    def reindex():
        build_id = holder.start_rebuild()
        return {"build_id": build_id, "status": "building"}

    @app.get("/admin/status")
    def status():
        snap = holder.snapshot
        return {"build_id": snap.build_id if snap else None,
                "building": holder.building,
                "last_error": holder.last_error}

    return app
