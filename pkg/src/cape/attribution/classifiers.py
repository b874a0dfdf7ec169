"""Five attribution models over boolean pattern vectors.

All models are implemented directly on numpy so that tie-breaking,
randomness, and gradients are fully specified: identical data,
hyperparameters, and seed always reproduce the identical fitted state.
Class labels are kept in ascending order, and every argmax therefore
resolves ties toward the lexicographically smallest actor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, DegenerateDataError, UnknownIdError
from .matrix import CtaTtpMatrix

MODEL_KINDS = ("naive_bayes", "decision_tree", "random_forest", "knn",
               "neural_net")


# ---------------------------------------------------------------------------
# Naive Bayes (Bernoulli event model, Laplace smoothing)
# ---------------------------------------------------------------------------

class BernoulliNaiveBayes:
    kind = "naive_bayes"

    def __init__(self, alpha: float = 1.0):
        if alpha <= 0:
            raise ConfigError(f"alpha must be > 0, got {alpha}")
        self.alpha = alpha

    def fit(self, X, y_idx, n_classes):
        n = len(y_idx)
        counts = np.bincount(y_idx, minlength=n_classes).astype(float)
        ones = np.zeros((n_classes, X.shape[1]))
        for c in range(n_classes):
            ones[c] = X[y_idx == c].sum(axis=0)
        self.theta = (ones + self.alpha) / (counts[:, None] + 2 * self.alpha)
        self.prior = counts / n
        return self

    def predict_scores(self, X):
        log_t = np.log(self.theta)
        log_not = np.log1p(-self.theta)
        logp = (np.log(self.prior)[None, :]
                + X @ log_t.T + (1 - X) @ log_not.T)
        logp -= logp.max(axis=1, keepdims=True)
        p = np.exp(logp)
        return p / p.sum(axis=1, keepdims=True)

    def params(self):
        return {"alpha": self.alpha, "theta": self.theta.tolist(),
                "prior": self.prior.tolist()}

    @classmethod
    def from_params(cls, data):
        model = cls(alpha=data["alpha"])
        model.theta = np.array(data["theta"])
        model.prior = np.array(data["prior"])
        return model


# ---------------------------------------------------------------------------
# Decision tree (CART, Gini impurity, boolean splits)
# ---------------------------------------------------------------------------

def _gini(counts):
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts / n
    return 1.0 - float((p * p).sum())


def _grow_tree(X, y_idx, n_classes, rng, max_features):
    """Recursive CART split on boolean features.

    The best split maximizes Gini gain; ties resolve to the lowest feature
    index.  While a node is impure, any proper split (both sides nonempty)
    is taken even at zero gain, so consistent data is always separated.
    When a random feature subset is used and yields no proper split, the
    search widens to all features before giving up.
    """
    counts = np.bincount(y_idx, minlength=n_classes).astype(float)
    node_gini = _gini(counts)
    if node_gini == 0.0:
        return {"leaf": True, "counts": counts.tolist()}

    n_features = X.shape[1]
    if max_features is not None and max_features < n_features:
        subset = np.sort(rng.choice(n_features, size=max_features,
                                    replace=False))
        candidate_sets = (subset, np.arange(n_features))
    else:
        candidate_sets = (np.arange(n_features),)

    best = None  # (gain, feature, mask)
    for candidates in candidate_sets:
        for f in candidates:
            mask = X[:, f] == 1
            n_right = int(mask.sum())
            if n_right == 0 or n_right == len(y_idx):
                continue
            right = np.bincount(y_idx[mask], minlength=n_classes).astype(float)
            left = counts - right
            weighted = (left.sum() * _gini(left)
                        + right.sum() * _gini(right)) / len(y_idx)
            gain = node_gini - weighted
            if best is None or gain > best[0]:
                best = (gain, int(f), mask)
        if best is not None:
            break

    if best is None:
        # No feature separates the rows: inconsistent duplicates.
        return {"leaf": True, "counts": counts.tolist()}
    _, feature, mask = best
    return {
        "leaf": False,
        "feature": feature,
        "left": _grow_tree(X[~mask], y_idx[~mask], n_classes, rng, max_features),
        "right": _grow_tree(X[mask], y_idx[mask], n_classes, rng, max_features),
    }


def _tree_scores(node, x):
    while not node["leaf"]:
        node = node["right"] if x[node["feature"]] == 1 else node["left"]
    counts = np.asarray(node["counts"], dtype=float)
    return counts / counts.sum()


class DecisionTree:
    kind = "decision_tree"

    def __init__(self):
        self.root = None

    def fit(self, X, y_idx, n_classes, rng=None):
        self.n_classes = n_classes
        self.root = _grow_tree(X, y_idx, n_classes,
                               rng or np.random.default_rng(0), None)
        return self

    def predict_scores(self, X):
        return np.array([_tree_scores(self.root, x) for x in X])

    def params(self):
        return {"root": self.root, "n_classes": self.n_classes}

    @classmethod
    def from_params(cls, data):
        model = cls()
        model.root = data["root"]
        model.n_classes = data["n_classes"]
        return model


class RandomForest:
    kind = "random_forest"

    def __init__(self, n_trees: int = 100, bootstrap: bool = True,
                 max_features: str | int | None = "sqrt"):
        if n_trees < 1:
            raise ConfigError(f"n_trees must be >= 1, got {n_trees}")
        self.n_trees = n_trees
        self.bootstrap = bootstrap
        self.max_features = max_features

    def _resolve_features(self, n_features):
        if self.max_features is None:
            return None
        if self.max_features == "sqrt":
            return max(1, int(np.sqrt(n_features)))
        m = int(self.max_features)
        if m < 1:
            raise ConfigError(f"max_features must be >= 1, got {m}")
        return min(m, n_features)

    def fit(self, X, y_idx, n_classes, seed: int = 0):
        self.n_classes = n_classes
        m = self._resolve_features(X.shape[1])
        self.trees = []
        for seq in np.random.SeedSequence(seed).spawn(self.n_trees):
            rng = np.random.default_rng(seq)
            if self.bootstrap:
                idx = rng.integers(0, len(y_idx), size=len(y_idx))
                Xb, yb = X[idx], y_idx[idx]
            else:
                Xb, yb = X, y_idx
            self.trees.append(_grow_tree(Xb, yb, n_classes, rng, m))
        return self

    def predict_scores(self, X):
        # Soft vote: mean of per-tree leaf distributions.
        out = np.zeros((len(X), self.n_classes))
        for tree in self.trees:
            out += np.array([_tree_scores(tree, x) for x in X])
        return out / self.n_trees

    def params(self):
        return {"n_trees": self.n_trees, "bootstrap": self.bootstrap,
                "max_features": self.max_features, "trees": self.trees,
                "n_classes": self.n_classes}

    @classmethod
    def from_params(cls, data):
        model = cls(n_trees=data["n_trees"], bootstrap=data["bootstrap"],
                    max_features=data["max_features"])
        model.trees = data["trees"]
        model.n_classes = data["n_classes"]
        return model


# ---------------------------------------------------------------------------
# K-nearest neighbors (Hamming distance)
# ---------------------------------------------------------------------------

class KNearestNeighbors:
    kind = "knn"

    def __init__(self, k: int = 5):
        if k < 1:
            raise ConfigError(f"k must be >= 1, got {k}")
        self.k = k

    def fit(self, X, y_idx, n_classes):
        self.X = X.astype(np.uint8)
        self.y_idx = np.asarray(y_idx)
        self.n_classes = n_classes
        return self

    def predict_scores(self, X):
        k = min(self.k, len(self.y_idx))
        out = np.zeros((len(X), self.n_classes))
        for i, x in enumerate(np.asarray(X, dtype=np.uint8)):
            dists = np.count_nonzero(self.X != x, axis=1)
            # Stable sort: equal distances resolve to the lower row index.
            nearest = np.argsort(dists, kind="stable")[:k]
            votes = np.bincount(self.y_idx[nearest], minlength=self.n_classes)
            out[i] = votes / k
        return out

    def params(self):
        return {"k": self.k, "X": self.X.tolist(),
                "y_idx": self.y_idx.tolist(), "n_classes": self.n_classes}

    @classmethod
    def from_params(cls, data):
        model = cls(k=data["k"])
        model.X = np.array(data["X"], dtype=np.uint8)
        model.y_idx = np.array(data["y_idx"])
        model.n_classes = data["n_classes"]
        return model


# ---------------------------------------------------------------------------
# Multilayer perceptron (one rectified hidden layer, softmax output)
# ---------------------------------------------------------------------------

class MultilayerPerceptron:
    kind = "neural_net"

    def __init__(self, hidden: int = 64, learning_rate: float = 0.01,
                 epochs: int = 200, batch_size: int = 32):
        if hidden < 1 or epochs < 1 or batch_size < 1:
            raise ConfigError("hidden, epochs, and batch_size must be >= 1")
        if learning_rate <= 0:
            raise ConfigError(f"learning_rate must be > 0, got {learning_rate}")
        self.hidden = hidden
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size

    def init_weights(self, n_features, n_classes, rng):
        self.W1 = rng.normal(0.0, np.sqrt(2.0 / n_features),
                             size=(n_features, self.hidden))
        self.b1 = np.zeros(self.hidden)
        self.W2 = rng.normal(0.0, np.sqrt(2.0 / self.hidden),
                             size=(self.hidden, n_classes))
        self.b2 = np.zeros(n_classes)
        self.n_classes = n_classes

    def _forward(self, X):
        z1 = X @ self.W1 + self.b1
        a1 = np.maximum(z1, 0.0)
        z2 = a1 @ self.W2 + self.b2
        z2 = z2 - z2.max(axis=1, keepdims=True)
        expz = np.exp(z2)
        probs = expz / expz.sum(axis=1, keepdims=True)
        return z1, a1, probs

    def loss(self, X, Y):
        """Mean cross-entropy of one-hot targets ``Y``."""
        _, _, probs = self._forward(X)
        eps = 1e-12
        return float(-(Y * np.log(probs + eps)).sum() / len(X))

    def loss_and_grads(self, X, Y):
        """Loss plus analytic gradients for every parameter."""
        z1, a1, probs = self._forward(X)
        n = len(X)
        eps = 1e-12
        loss = float(-(Y * np.log(probs + eps)).sum() / n)
        dz2 = (probs - Y) / n
        grads = {
            "W2": a1.T @ dz2,
            "b2": dz2.sum(axis=0),
        }
        da1 = dz2 @ self.W2.T
        dz1 = da1 * (z1 > 0)
        grads["W1"] = X.T @ dz1
        grads["b1"] = dz1.sum(axis=0)
        return loss, grads

    def fit(self, X, y_idx, n_classes, seed: int = 0):
        rng = np.random.default_rng(seed)
        X = np.asarray(X, dtype=float)
        Y = np.eye(n_classes)[y_idx]
        self.init_weights(X.shape[1], n_classes, rng)
        for _ in range(self.epochs):
            order = rng.permutation(len(X))
            for start in range(0, len(X), self.batch_size):
                batch = order[start:start + self.batch_size]
                _, grads = self.loss_and_grads(X[batch], Y[batch])
                self.W1 -= self.learning_rate * grads["W1"]
                self.b1 -= self.learning_rate * grads["b1"]
                self.W2 -= self.learning_rate * grads["W2"]
                self.b2 -= self.learning_rate * grads["b2"]
        return self

    def predict_scores(self, X):
        _, _, probs = self._forward(np.asarray(X, dtype=float))
        return probs

    def params(self):
        return {"hidden": self.hidden, "learning_rate": self.learning_rate,
                "epochs": self.epochs, "batch_size": self.batch_size,
                "W1": self.W1.tolist(), "b1": self.b1.tolist(),
                "W2": self.W2.tolist(), "b2": self.b2.tolist(),
                "n_classes": self.n_classes}

    @classmethod
    def from_params(cls, data):
        model = cls(hidden=data["hidden"], learning_rate=data["learning_rate"],
                    epochs=data["epochs"], batch_size=data["batch_size"])
        model.W1 = np.array(data["W1"])
        model.b1 = np.array(data["b1"])
        model.W2 = np.array(data["W2"])
        model.b2 = np.array(data["b2"])
        model.n_classes = data["n_classes"]
        return model


# ---------------------------------------------------------------------------
# Shared training / prediction surface
# ---------------------------------------------------------------------------

_IMPLS = {
    "naive_bayes": BernoulliNaiveBayes,
    "decision_tree": DecisionTree,
    "random_forest": RandomForest,
    "knn": KNearestNeighbors,
    "neural_net": MultilayerPerceptron,
}


@dataclass
class TrainedModel:
    """A fitted classifier plus the schema it understands."""

    kind: str
    feature_schema: list
    classes: list
    seed: int
    impl: object

    def predict_scores(self, X):
        return self.impl.predict_scores(np.asarray(X, dtype=np.uint8))


def _fit_arrays(X, labels):
    classes = sorted(set(labels))
    if len(classes) < 2:
        raise DegenerateDataError("training data holds a single class")
    index = {c: i for i, c in enumerate(classes)}
    y_idx = np.array([index[l] for l in labels])
    return classes, y_idx


def train(kind: str, matrix: CtaTtpMatrix, hyperparameters: dict | None = None,
          seed: int = 0) -> TrainedModel:
    """Fit one model kind on the matrix; see module doc for determinism."""
    return train_arrays(kind, matrix.rows, matrix.labels, matrix.ttp_ids,
                        hyperparameters, seed)


def train_arrays(kind, X, labels, feature_schema, hyperparameters=None,
                 seed: int = 0) -> TrainedModel:
    if kind not in _IMPLS:
        raise ConfigError(f"unknown model kind {kind!r}; expected one of "
                          f"{MODEL_KINDS}")
    if len(labels) == 0:
        raise DegenerateDataError("empty training data")
    hyper = dict(hyperparameters or {})
    X = np.asarray(X, dtype=np.uint8)
    classes, y_idx = _fit_arrays(X, labels)

    try:
        impl = _IMPLS[kind](**hyper)
    except TypeError as exc:
        raise ConfigError(f"invalid hyperparameters for {kind}: {hyper}") from exc

    if kind in ("random_forest", "neural_net"):
        impl.fit(X, y_idx, len(classes), seed=seed)
    else:
        impl.fit(X, y_idx, len(classes))
    return TrainedModel(kind=kind, feature_schema=list(feature_schema),
                        classes=classes, seed=seed, impl=impl)


def vector_from_patterns(feature_schema, patterns) -> np.ndarray:
    """Boolean vector over the schema, rejecting unknown pattern ids."""
    unknown = sorted(set(patterns) - set(feature_schema))
    if unknown:
        raise UnknownIdError(f"unknown pattern ids: {', '.join(unknown)}",
                             unknown)
    wanted = set(patterns)
    return np.array([1 if f in wanted else 0 for f in feature_schema],
                    dtype=np.uint8)


def predict(model: TrainedModel, ttp_vector):
    """Classify one pattern vector; returns (actor, per-actor scores).

    ``ttp_vector`` is either a mapping from feature id to 0/1 (missing or
    extra features are an error naming them) or a sequence aligned with the
    model's schema.  Scores are normalized and sorted descending, ties by
    actor name.
    """
    schema = model.feature_schema
    if isinstance(ttp_vector, dict):
        missing = sorted(set(schema) - set(ttp_vector))
        extra = sorted(set(ttp_vector) - set(schema))
        if missing or extra:
            raise UnknownIdError(
                f"feature schema mismatch; missing={missing} extra={extra}",
                missing + extra)
        x = np.array([int(ttp_vector[f]) for f in schema], dtype=np.uint8)
    else:
        x = np.asarray(ttp_vector, dtype=np.uint8)
        if x.shape != (len(schema),):
            raise UnknownIdError(
                f"expected a vector of length {len(schema)}, got {x.shape}")
    scores = model.predict_scores(x[None, :])[0]
    best = model.classes[int(np.argmax(scores))]
    ranked = sorted(zip(model.classes, (float(s) for s in scores)),
                    key=lambda pair: (-pair[1], pair[0]))
    return best, ranked
