"""Cross-validation and classification metrics.

Folds are stratified: each class's rows are shuffled once (seeded) and
dealt round-robin across the folds, so every fold sees every retained
class.  Classes with fewer rows than folds are excluded and noted in the
report.  Aggregate metrics come from the confusion matrix pooled over all
folds, which keeps accuracy exactly trace/total.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, DegenerateDataError
from .classifiers import train_arrays
from .matrix import CtaTtpMatrix


def confusion_matrix(y_true, y_pred, classes) -> np.ndarray:
    """Rows are actual classes, columns predicted."""
    index = {c: i for i, c in enumerate(classes)}
    conf = np.zeros((len(classes), len(classes)), dtype=int)
    for t, p in zip(y_true, y_pred):
        conf[index[t], index[p]] += 1
    return conf


def metrics(confusion, classes=None) -> dict:
    """Macro-averaged metric set from a square confusion matrix.

    Per-class precision is 0 by convention when the class is never
    predicted; F1 is the harmonic mean of the class's own precision and
    recall (0 when both vanish).  Macro FPR averages FP / (FP + TN).
    """
    conf = np.asarray(confusion, dtype=float)
    if conf.size == 0:
        raise DegenerateDataError("empty confusion matrix")
    if conf.ndim != 2 or conf.shape[0] != conf.shape[1]:
        raise ConfigError(f"confusion matrix must be square, got {conf.shape}")
    total = conf.sum()
    if total == 0:
        raise DegenerateDataError("confusion matrix has no observations")
    n = conf.shape[0]
    classes = list(classes) if classes is not None else list(range(n))

    tp = np.diag(conf)
    predicted = conf.sum(axis=0)
    actual = conf.sum(axis=1)
    fp = predicted - tp
    fn = actual - tp
    tn = total - tp - fp - fn

    with np.errstate(invalid="ignore", divide="ignore"):
        precision = np.where(predicted > 0, tp / predicted, 0.0)
        recall = np.where(actual > 0, tp / actual, 0.0)
        f1 = np.where(precision + recall > 0,
                      2 * precision * recall / (precision + recall), 0.0)
        fpr = np.where(fp + tn > 0, fp / (fp + tn), 0.0)

    per_class = {
        str(c): {"precision": float(precision[i]), "recall": float(recall[i]),
                 "f1": float(f1[i])}
        for i, c in enumerate(classes)
    }
    return {
        "accuracy": float(tp.sum() / total),
        "macro_precision": float(precision.mean()),
        "macro_recall": float(recall.mean()),
        "macro_f1": float(f1.mean()),
        "macro_fpr": float(fpr.mean()),
        "per_class": per_class,
    }


@dataclass
class EvalReport:
    kind: str
    k: int
    seed: int
    classes: list
    excluded_actors: list
    per_fold: list                    # metric dict per fold
    aggregate: dict                   # metrics over the pooled confusion
    confusion: list = field(default_factory=list)

    @property
    def accuracy(self) -> float:
        return self.aggregate["accuracy"]

    def to_dict(self) -> dict:
        return {
            "format": "cape-eval/1",
            "kind": self.kind,
            "k": self.k,
            "seed": self.seed,
            "classes": self.classes,
            "excluded_actors": self.excluded_actors,
            "per_fold": self.per_fold,
            "aggregate": self.aggregate,
            "confusion": self.confusion,
        }


def _stratified_folds(labels, k, seed):
    rng = np.random.default_rng(seed)
    by_class = {}
    for i, label in enumerate(labels):
        by_class.setdefault(label, []).append(i)
    folds = [[] for _ in range(k)]
    for label in sorted(by_class):
        idx = np.array(by_class[label])
        rng.shuffle(idx)
        for j, row in enumerate(idx):
            folds[j % k].append(int(row))
    return [sorted(f) for f in folds]


def cross_validate(kind: str, matrix: CtaTtpMatrix, k: int = 10,
                   seed: int = 0, hyperparameters: dict | None = None) -> EvalReport:
    """Stratified k-fold evaluation of one model kind."""
    if k < 2:
        raise ConfigError(f"k must be >= 2, got {k}")
    counts = {}
    for label in matrix.labels:
        counts[label] = counts.get(label, 0) + 1
    excluded = sorted(a for a, c in counts.items() if c < k)
    keep = [i for i, label in enumerate(matrix.labels) if label not in excluded]
    if not keep:
        raise DegenerateDataError(
            f"no class has at least {k} rows; nothing to evaluate")
    if k > len(keep):
        raise ConfigError(f"k={k} exceeds the {len(keep)} usable rows")

    X = matrix.rows[keep]
    labels = [matrix.labels[i] for i in keep]
    classes = sorted(set(labels))
    if len(classes) < 2:
        raise DegenerateDataError("fewer than two classes remain after "
                                  "excluding small actors")
    folds = _stratified_folds(labels, k, seed)

    pooled = np.zeros((len(classes), len(classes)), dtype=int)
    per_fold = []
    for fold in folds:
        test = np.array(fold, dtype=int)
        train_mask = np.ones(len(labels), dtype=bool)
        train_mask[test] = False
        model = train_arrays(kind, X[train_mask],
                             [labels[i] for i in np.flatnonzero(train_mask)],
                             matrix.ttp_ids, hyperparameters, seed)
        scores = model.predict_scores(X[test])
        preds = [model.classes[int(np.argmax(s))] for s in scores]
        truth = [labels[i] for i in test]
        conf = confusion_matrix(truth, preds, classes)
        pooled += conf
        per_fold.append(metrics(conf, classes))

    aggregate = metrics(pooled, classes)
    return EvalReport(
        kind=kind, k=k, seed=seed, classes=classes,
        excluded_actors=excluded, per_fold=per_fold, aggregate=aggregate,
        confusion=pooled.tolist(),
    )
