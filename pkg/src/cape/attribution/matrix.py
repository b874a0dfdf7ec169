"""The boolean actor x attack-pattern incidence matrix.

One row per labeled document: a cell is 1 iff the document's pattern
transaction contains that pattern.  The actor label is the prediction
target; pattern columns are the features.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field

import numpy as np

from ..corpus import Corpus
from ..errors import DegenerateDataError, FormatError

logger = logging.getLogger(__name__)

MATRIX_FORMAT = "cape-matrix/1"


@dataclass
class CtaTtpMatrix:
    actors: list            # distinct labels, sorted
    ttp_ids: list           # feature columns, stable order
    rows: np.ndarray        # n x len(ttp_ids), uint8 in {0, 1}
    labels: list            # actor per row
    doc_ids: list           # provenance: contributing document per row
    flagged_actors: list = field(default_factory=list)  # too few rows for CV

    @property
    def shape(self):
        return self.rows.shape

    # -- persistence -----------------------------------------------------

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# format: {MATRIX_FORMAT}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["actor"] + list(self.ttp_ids))
        for label, row in zip(self.labels, self.rows):
            writer.writerow([label] + [int(v) for v in row])
        return buf.getvalue()

    def meta(self) -> dict:
        return {
            "format": MATRIX_FORMAT,
            "doc_ids": list(self.doc_ids),
            "flagged_actors": list(self.flagged_actors),
        }

    @classmethod
    def from_csv(cls, text: str, meta: dict | None = None) -> "CtaTtpMatrix":
        lines = text.splitlines()
        if not lines or lines[0] != f"# format: {MATRIX_FORMAT}":
            raise FormatError(f"not a {MATRIX_FORMAT} file")
        reader = csv.reader(lines[1:])
        header = next(reader)
        if not header or header[0] != "actor":
            raise FormatError("matrix header must start with 'actor'")
        ttp_ids = header[1:]
        labels, rows = [], []
        for record in reader:
            if not record:
                continue
            labels.append(record[0])
            rows.append([int(v) for v in record[1:]])
        meta = meta or {}
        return cls(
            actors=sorted(set(labels)),
            ttp_ids=ttp_ids,
            rows=np.array(rows, dtype=np.uint8).reshape(len(labels), len(ttp_ids)),
            labels=labels,
            doc_ids=list(meta.get("doc_ids", [""] * len(labels))),
            flagged_actors=list(meta.get("flagged_actors", [])),
        )


def build_matrix(corpus: Corpus, transactions: dict, feature_ids=None,
                 min_rows: int = 10) -> CtaTtpMatrix:
    """Assemble the matrix from labeled documents and their transactions.

    ``feature_ids`` fixes the column order; by default it is the sorted
    union of all pattern ids seen in the transactions.  Actors with fewer
    than ``min_rows`` documents are flagged (cross-validation at that many
    folds would exclude them).  All-zero rows are retained.
    """
    labeled = corpus.labeled_documents()
    if not labeled:
        raise DegenerateDataError("no labeled documents; cannot build the matrix")
    if feature_ids is None:
        feature_ids = sorted({p for t in transactions.values() for p in t})
    feature_ids = list(feature_ids)
    col = {t: i for i, t in enumerate(feature_ids)}

    labeled.sort(key=lambda d: d.doc_id)
    rows = np.zeros((len(labeled), len(feature_ids)), dtype=np.uint8)
    labels, doc_ids = [], []
    zero_rows = 0
    for r, doc in enumerate(labeled):
        patterns = transactions.get(doc.doc_id, frozenset())
        for p in patterns:
            if p in col:
                rows[r, col[p]] = 1
        if not patterns:
            zero_rows += 1
        labels.append(doc.actor_label)
        doc_ids.append(doc.doc_id)
    if zero_rows:
        logger.warning("%d labeled documents exhibit no pattern; all-zero "
                       "rows retained", zero_rows)

    counts = {}
    for label in labels:
        counts[label] = counts.get(label, 0) + 1
    flagged = sorted(a for a, c in counts.items() if c < min_rows)
    return CtaTtpMatrix(
        actors=sorted(counts),
        ttp_ids=feature_ids,
        rows=rows,
        labels=labels,
        doc_ids=doc_ids,
        flagged_actors=flagged,
    )
