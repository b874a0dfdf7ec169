"""Document store for unstructured CTI reports.

Ingestion normalizes each report into an ordered token list and maintains
the term statistics (document frequencies and per-document occurrence
counts) that every downstream scoring step reads.  A store starts writable;
once ``seal()`` is called it becomes an immutable snapshot that may be read
concurrently.
"""

from __future__ import annotations

import datetime as dt
import json
import re
from dataclasses import dataclass, field
from importlib import resources

from .errors import DocumentError, StateError

# CVE identifiers survive tokenization whole; everything else splits on
# non-alphanumeric runs (hyphens separate).
_TOKEN_RE = re.compile(r"cve-\d{4}-\d{4,}|[a-z0-9]+")


def _load_stopwords() -> frozenset:
    text = resources.files("cape.data").joinpath("stopwords.txt").read_text("utf-8")
    words = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line)
    return frozenset(words)


STOPWORDS = _load_stopwords()

_VOWELS = set("aeiouy")


def light_stem(token: str) -> str:
    """Conservative English suffix folding (plural, -ing, -ed).

    Deliberately mild: identifiers (CVE ids, digit runs) pass through
    untouched, and a suffix is only stripped when a vowel remains in the
    stem.  Off by default everywhere; enable per corpus.
    """
    if token.startswith("cve-") or token.isdigit():
        return token
    if len(token) > 4 and token.endswith("sses"):
        return token[:-2]
    if len(token) > 4 and token.endswith("ies"):
        return token[:-3] + "y"
    if (len(token) > 3 and token.endswith("s")
            and not token.endswith(("ss", "us", "is"))):
        token = token[:-1]
    for suffix in ("ing", "ed"):
        if len(token) > len(suffix) + 3 and token.endswith(suffix):
            stem = token[:-len(suffix)]
            if any(c in _VOWELS for c in stem):
                return stem
    return token


def preprocess(text: str, stemming: bool = False) -> list:
    """Normalize raw text into the token stream used by all statistics.

    Lowercases, splits on non-alphanumeric characters (a hyphen is a
    separator), keeps CVE-style identifiers intact, and drops stop words
    and single-character tokens.  Bare digit runs are kept only when at
    least two characters long.  Deterministic: equal inputs always yield
    equal outputs.
    """
    tokens = []
    for tok in _TOKEN_RE.findall(text.lower()):
        if len(tok) < 2:
            continue
        if tok in STOPWORDS:
            continue
        if stemming:
            tok = light_stem(tok)
        tokens.append(tok)
    return tokens


def parse_date(value) -> dt.date | None:
    """Parse an ISO-8601 date or datetime; ``None`` stays ``None``.

    Timestamps are truncated to whole days and timezones discarded.
    """
    if value is None:
        return None
    if isinstance(value, dt.datetime):
        return value.date()
    if isinstance(value, dt.date):
        return value
    text = str(value).strip()
    if not text:
        return None
    try:
        return dt.date.fromisoformat(text[:10])
    except ValueError as exc:
        raise DocumentError(f"unparseable date: {value!r}") from exc


@dataclass(frozen=True)
class Document:
    """One stored CTI report."""

    doc_id: str
    source: str
    published_date: dt.date | None
    text: str
    tokens: tuple
    actor_label: str | None = None

    @property
    def token_count(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class TermStats:
    """Occurrence statistics of one normalized term."""

    term: str
    doc_frequency: int
    per_doc_frequency: dict = field(default_factory=dict)


class Corpus:
    """Single-writer document store with an explicit seal step.

    Writes go through :meth:`ingest` while the store is unsealed; sealing
    freezes the snapshot for all downstream readers.
    """

    def __init__(self, stemming: bool = False):
        self._docs: dict[str, Document] = {}
        self._term_docs: dict[str, dict[str, int]] = {}
        self._sealed = False
        self._auto_id = 0
        self.stemming = stemming

    # -- ingestion -----------------------------------------------------

    def ingest(self, record: dict) -> str:
        """Store one raw document record and update term statistics.

        ``record`` carries ``{id, source, date, actor, text}``; ``id`` may
        be absent, in which case a sequential id is assigned.  Re-ingesting
        an identical record is a no-op; a duplicate id with different
        content is rejected.
        """
        if self._sealed:
            raise StateError("corpus is sealed; ingestion is closed")
        text = record.get("text")
        if not isinstance(text, str) or not text.strip():
            raise DocumentError("document text is empty")

        doc_id = record.get("id")
        if doc_id is None:
            self._auto_id += 1
            doc_id = f"doc{self._auto_id:05d}"
        doc_id = str(doc_id)

        doc = Document(
            doc_id=doc_id,
            source=str(record.get("source") or ""),
            published_date=parse_date(record.get("date")),
            text=text,
            tokens=tuple(preprocess(text, stemming=self.stemming)),
            actor_label=record.get("actor") or None,
        )

        existing = self._docs.get(doc_id)
        if existing is not None:
            if existing == doc:
                return doc_id  # idempotent re-ingest
            raise DocumentError(f"duplicate doc_id {doc_id!r} with different content")

        self._docs[doc_id] = doc
        for tok in doc.tokens:
            counts = self._term_docs.setdefault(tok, {})
            counts[doc_id] = counts.get(doc_id, 0) + 1
        return doc_id

    def seal(self) -> "Corpus":
        """Freeze the store; further ingestion raises ``StateError``."""
        self._sealed = True
        return self

    @property
    def sealed(self) -> bool:
        return self._sealed

    # -- lookups ---------------------------------------------------------

    def corpus_size(self) -> int:
        return len(self._docs)

    def document(self, doc_id: str) -> Document:
        try:
            return self._docs[doc_id]
        except KeyError:
            raise DocumentError(f"unknown document {doc_id!r}") from None

    def documents(self) -> list:
        return list(self._docs.values())

    def doc_ids(self) -> list:
        return list(self._docs)

    def vocabulary(self) -> list:
        return sorted(self._term_docs)

    def term_stats(self, term: str) -> TermStats:
        counts = self._term_docs.get(term, {})
        return TermStats(term=term, doc_frequency=len(counts),
                         per_doc_frequency=dict(counts))

    def term_frequency(self, term: str, doc_id: str) -> int:
        """fr(dc, wd): occurrences of ``term`` in one document."""
        return self._term_docs.get(term, {}).get(doc_id, 0)

    def term_doc_ids(self, term: str) -> frozenset:
        """Set of documents containing ``term``."""
        return frozenset(self._term_docs.get(term, ()))

    def labeled_documents(self) -> list:
        return [d for d in self._docs.values() if d.actor_label]

    def actors(self) -> list:
        return sorted({d.actor_label for d in self._docs.values() if d.actor_label})


def load_jsonl(path, alias_map: dict | None = None,
               stemming: bool = False) -> Corpus:
    """Build a sealed corpus from a JSON-lines file.

    Each line holds one object with fields ``{id, source, date, actor,
    text}``.  ``alias_map`` optionally folds actor aliases onto canonical
    names before storage.
    """
    corpus = Corpus(stemming=stemming)
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DocumentError(f"{path}:{lineno}: invalid JSON") from exc
            if alias_map and record.get("actor"):
                record["actor"] = alias_map.get(record["actor"], record["actor"])
            corpus.ingest(record)
    return corpus.seal()


def load_alias_map(path=None) -> dict:
    """Load the actor alias map (defaults to the bundled data file)."""
    if path is None:
        raw = resources.files("cape.data").joinpath("actor_aliases.json").read_text("utf-8")
    else:
        with open(path, "r", encoding="utf-8") as handle:
            raw = handle.read()
    data = json.loads(raw)
    aliases = {}
    for canonical, names in data.items():
        for name in names:
            aliases[name] = canonical
    return aliases
