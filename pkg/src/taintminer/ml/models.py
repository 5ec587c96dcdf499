"""Logistic regression, multinomial naive Bayes, k-nearest neighbours and an entropy tree."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ..errors import ColumnMismatch, DegenerateTraining
from .metrics import EvalEntry
from .split import Dataset

__all__ = [
    "MODEL_KINDS",
    "Model",
    "LogisticRegression",
    "NaiveBayes",
    "KNearestNeighbors",
    "DecisionTree",
    "train",
    "evaluate",
]

MODEL_KINDS = ("logistic_regression", "naive_bayes", "knn", "decision_tree")


class Model:
    """Common interface: ``fit`` on a boolean target, ``score`` higher for positives."""

    kind = "model"
    columns: list[str]
    degenerate: bool = False
    constant: bool = False

    def fit(self, X: np.ndarray, y: np.ndarray) -> Model:
        raise NotImplementedError

    def score(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def predict(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _fit_constant(self, y: np.ndarray) -> bool:
        if y.size and (y.all() or not y.any()):
            warnings.warn(
                f"{self.kind}: training data holds a single class; predicting it everywhere",
                DegenerateTraining,
                stacklevel=3,
            )
            self.degenerate = True
            self.constant = bool(y[0])
            return True
        return False

    def _constant_scores(self, X: np.ndarray) -> np.ndarray:
        return np.full(len(X), 1.0 if self.constant else 0.0)


@dataclass
class LogisticRegression(Model):
    """Gradient descent on the mean cross-entropy with an L2 penalty on the weights."""

    l2: float = 1e-3
    learning_rate: float = 0.5
    iterations: int = 3000
    kind = "logistic_regression"
    weights: np.ndarray = field(default_factory=lambda: np.zeros(0))
    bias: float = 0.0
    mean: np.ndarray = field(default_factory=lambda: np.zeros(0))
    std: np.ndarray = field(default_factory=lambda: np.ones(0))

    def fit(self, X: np.ndarray, y: np.ndarray) -> LogisticRegression:
        if self._fit_constant(y):
            return self
        self.mean = X.mean(axis=0)
        std = X.std(axis=0)
        self.std = np.where(std > 0, std, 1.0)
        Z = (X - self.mean) / self.std
        t = y.astype(float)
        w = np.zeros(Z.shape[1])
        b = 0.0
        n = len(t)
        for _ in range(self.iterations):
            p = _sigmoid(Z @ w + b)
            err = p - t
            w -= self.learning_rate * (Z.T @ err / n + self.l2 * w)
            b -= self.learning_rate * err.mean()
        self.weights, self.bias = w, b
        return self

    def score(self, X: np.ndarray) -> np.ndarray:
        if self.degenerate:
            return self._constant_scores(X)
        return _sigmoid(((X - self.mean) / self.std) @ self.weights + self.bias)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.score(X) >= 0.5


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


@dataclass
class NaiveBayes(Model):
    """Multinomial naive Bayes over count features, add-one smoothing; scores are log-odds."""

    alpha: float = 1.0
    kind = "naive_bayes"
    log_prior: np.ndarray = field(default_factory=lambda: np.zeros(2))
    log_theta: np.ndarray = field(default_factory=lambda: np.zeros((2, 0)))

    def fit(self, X: np.ndarray, y: np.ndarray) -> NaiveBayes:
        if self._fit_constant(y):
            return self
        if (X < 0).any():
            raise ValueError("multinomial naive Bayes needs non-negative counts")
        rows = [X[~y], X[y]]
        self.log_prior = np.log(np.array([len(r) for r in rows], dtype=float) / len(y))
        counts = np.vstack([r.sum(axis=0) for r in rows]) + self.alpha
        self.log_theta = np.log(counts / counts.sum(axis=1, keepdims=True))
        return self

    def score(self, X: np.ndarray) -> np.ndarray:
        if self.degenerate:
            return self._constant_scores(X)
        joint = X @ self.log_theta.T + self.log_prior
        return joint[:, 1] - joint[:, 0]

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.score(X) >= 0


@dataclass
class KNearestNeighbors(Model):
    """Euclidean k-NN.  The score is the share of positive neighbours; an exact
    half is settled by the single nearest neighbour."""

    k: int = 5
    kind = "knn"
    X: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    y: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be at least 1")

    def fit(self, X: np.ndarray, y: np.ndarray) -> KNearestNeighbors:
        self._fit_constant(y)
        self.X, self.y = X.astype(float), y.astype(bool)
        return self

    def _neighbours(self, X: np.ndarray) -> np.ndarray:
        d = (X**2).sum(axis=1)[:, None] - 2 * X @ self.X.T + (self.X**2).sum(axis=1)[None, :]
        k = min(self.k, len(self.X))
        # stable order: equal distances go to the earlier training row
        return np.argsort(np.maximum(d, 0), axis=1, kind="stable")[:, :k]

    def score(self, X: np.ndarray) -> np.ndarray:
        return self.y[self._neighbours(X)].mean(axis=1)

    def predict(self, X: np.ndarray) -> np.ndarray:
        nb = self._neighbours(X)
        frac = self.y[nb].mean(axis=1)
        return np.where(frac == 0.5, self.y[nb[:, 0]], frac > 0.5)


@dataclass
class _Node:
    positive_rate: float
    feature: int = -1
    threshold: float = 0.0
    left: _Node | None = None
    right: _Node | None = None


def _entropy(pos: np.ndarray, n: np.ndarray) -> np.ndarray:
    p = np.divide(pos, n, out=np.zeros_like(pos, dtype=float), where=n > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(np.where(p > 0, p * np.log2(p), 0.0) + np.where(p < 1, (1 - p) * np.log2(1 - p), 0.0))
    return h


@dataclass
class DecisionTree(Model):
    """Binary tree grown by information gain (entropy), with depth and leaf-size limits.

    With ``debug`` on, every accepted split is checked to have non-negative
    gain and to lower the weighted child entropy below the parent's.
    """

    max_depth: int = 12
    min_leaf: int = 2
    debug: bool = True
    kind = "decision_tree"
    root: _Node | None = None
    gains: list[float] = field(default_factory=list)

    def fit(self, X: np.ndarray, y: np.ndarray) -> DecisionTree:
        self._fit_constant(y)
        self.gains = []
        self.root = self._grow(X, y, 0)
        return self

    def _grow(self, X: np.ndarray, y: np.ndarray, depth: int) -> _Node:
        node = _Node(float(y.mean()) if len(y) else 0.0)
        if depth >= self.max_depth or len(y) < 2 * self.min_leaf or y.all() or not y.any():
            return node
        best = self._best_split(X, y)
        if best is None:
            return node
        gain, feature, threshold = best
        if self.debug:
            mask = X[:, feature] <= threshold
            parent = _entropy(np.array([y.sum()]), np.array([len(y)]))[0]
            children = sum(
                m.sum() / len(y) * _entropy(np.array([y[m].sum()]), np.array([m.sum()]))[0] for m in (mask, ~mask)
            )
            if gain < -1e-12 or children > parent + 1e-12:
                raise AssertionError(f"split on column {feature} does not reduce entropy")
        self.gains.append(gain)
        mask = X[:, feature] <= threshold
        node.feature, node.threshold = feature, threshold
        node.left = self._grow(X[mask], y[mask], depth + 1)
        node.right = self._grow(X[~mask], y[~mask], depth + 1)
        return node

    def _best_split(self, X: np.ndarray, y: np.ndarray) -> tuple[float, int, float] | None:
        n = len(y)
        parent = _entropy(np.array([y.sum()]), np.array([n]))[0]
        best: tuple[float, int, float] | None = None
        sizes = np.arange(1, n)
        for j in range(X.shape[1]):
            order = np.argsort(X[:, j], kind="stable")
            xs = X[order, j]
            cum = np.cumsum(y[order])[:-1]
            # a cut after position i separates xs[:i+1] from the rest
            valid = (xs[1:] != xs[:-1]) & (sizes >= self.min_leaf) & (n - sizes >= self.min_leaf)
            if not valid.any():
                continue
            left = _entropy(cum, sizes)
            right = _entropy(y.sum() - cum, n - sizes)
            gain = parent - (sizes * left + (n - sizes) * right) / n
            gain = np.where(valid, gain, -np.inf)
            i = int(np.argmax(gain))
            if gain[i] > 1e-12 and (best is None or gain[i] > best[0]):
                best = (float(gain[i]), j, float((xs[i] + xs[i + 1]) / 2))
        return best

    def _leaf(self, x: np.ndarray) -> _Node:
        node = self.root
        while node.left is not None:
            node = node.left if x[node.feature] <= node.threshold else node.right
        return node

    def score(self, X: np.ndarray) -> np.ndarray:
        return np.array([self._leaf(x).positive_rate for x in X])

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.score(X) >= 0.5


_FACTORIES = {
    "logistic_regression": LogisticRegression,
    "naive_bayes": NaiveBayes,
    "knn": KNearestNeighbors,
    "decision_tree": DecisionTree,
}


def train(ds: Dataset, model_kind: str, **params) -> Model:
    """Fit one classifier on ``ds``; extra keyword arguments go to its constructor."""
    if model_kind not in _FACTORIES:
        raise ValueError(f"unknown model kind {model_kind!r}; choose from {', '.join(MODEL_KINDS)}")
    if len(ds) == 0:
        raise ValueError("cannot train on an empty dataset")
    model = _FACTORIES[model_kind](**params)
    model.columns = list(ds.features.column_labels)
    return model.fit(ds.X, ds.y)


def evaluate(model: Model, test: Dataset) -> EvalEntry:
    if list(test.features.column_labels) != model.columns:
        raise ColumnMismatch("test columns differ from the training columns")
    X = test.X
    return EvalEntry.from_predictions(test.y, model.predict(X), model.score(X))
