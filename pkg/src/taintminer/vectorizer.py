"""Token2Vec and Flow2Vec: per-app bags of words and flow counts as one numeric matrix."""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import AppSetMismatch, EmptyCorpus
from .flowsminer import MinerReport
from .taintmodel import FLOW_COLUMNS, FlowCategory

__all__ = [
    "Vocabulary",
    "FlowVector",
    "FeatureMatrix",
    "LABELS",
    "build_vocabulary",
    "token2vec",
    "flow2vec",
    "combine",
]

VULNERABLE = "vulnerable"
NON_VULNERABLE = "non-vulnerable"
UNKNOWN = "unknown"
LABELS = (VULNERABLE, NON_VULNERABLE, UNKNOWN)
FEATURE_SETS = ("bow", "flows", "bow+flows")


@dataclass(frozen=True)
class Vocabulary:
    tokens: tuple[str, ...]
    app_support: Mapping[str, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: object) -> bool:
        return token in self.tokens


@dataclass(frozen=True)
class FlowVector:
    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.counts) != len(FLOW_COLUMNS) or any(c < 0 for c in self.counts):
            raise ValueError("a flow vector holds six non-negative counts")

    @classmethod
    def zero(cls) -> FlowVector:
        return cls((0,) * len(FLOW_COLUMNS))

    def __iter__(self):
        return iter(self.counts)

    def total(self) -> int:
        return sum(self.counts)


@dataclass
class FeatureMatrix:
    row_labels: list[str]
    column_labels: list[str]
    values: np.ndarray
    labels: list[str] | None = None

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.int64).reshape(len(self.row_labels), len(self.column_labels))
        if len(set(self.column_labels)) != len(self.column_labels):
            raise ValueError("duplicate column label")
        if self.labels is not None and len(self.labels) != len(self.row_labels):
            raise ValueError("one label per row is required")
        if (self.values < 0).any():
            raise ValueError("feature counts must be non-negative")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def with_labels(self, labels: Mapping[str, str]) -> FeatureMatrix:
        return FeatureMatrix(self.row_labels, self.column_labels, self.values, [labels[a] for a in self.row_labels])

    def select(self, features: str) -> FeatureMatrix:
        """Keep the BoW columns, the flow columns, or both."""
        if features not in FEATURE_SETS:
            raise ValueError(f"unknown feature set {features!r}")
        flow_cols = set(FLOW_COLUMNS)
        keep = [
            i
            for i, c in enumerate(self.column_labels)
            if features == "bow+flows" or (c in flow_cols) == (features == "flows")
        ]
        return FeatureMatrix(
            self.row_labels, [self.column_labels[i] for i in keep], self.values[:, keep], self.labels
        )

    def rows(self, idx: Sequence[int]) -> FeatureMatrix:
        idx = list(idx)
        labels = [self.labels[i] for i in idx] if self.labels is not None else None
        return FeatureMatrix([self.row_labels[i] for i in idx], list(self.column_labels), self.values[idx], labels)

    # ------------------------------------------------------------------ csv
    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["app", "label", *self.column_labels])
        for i, app in enumerate(self.row_labels):
            label = self.labels[i] if self.labels is not None else UNKNOWN
            w.writerow([app, label, *(int(v) for v in self.values[i])])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    @classmethod
    def from_csv(cls, path: str | Path) -> FeatureMatrix:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        if not rows or rows[0][:2] != ["app", "label"]:
            raise ValueError(f"{path}: not a feature CSV")
        columns = rows[0][2:]
        body = rows[1:]
        values = np.array([[int(v) for v in r[2:]] for r in body], dtype=np.int64).reshape(len(body), len(columns))
        labels = [r[1] for r in body]
        return cls([r[0] for r in body], columns, values, labels)


def build_vocabulary(bags: Iterable[tuple[str, Mapping[str, int]]], min_apps: int = 5) -> Vocabulary:
    """Union of the apps' token sets, keeping tokens seen in at least ``min_apps`` apps."""
    if min_apps < 1:
        raise ValueError("min_apps must be at least 1")
    support: Counter[str] = Counter()
    n = 0
    for _, bag in bags:
        n += 1
        support.update(set(bag))
    if n == 0:
        raise EmptyCorpus("cannot build a vocabulary from zero apps")
    kept = sorted(t for t, c in support.items() if c >= min_apps)
    return Vocabulary(tuple(kept), dict(support))


def token2vec(bags: Iterable[tuple[str, Mapping[str, int]]], vocab: Vocabulary) -> FeatureMatrix:
    """One row per app: the frequency of each vocabulary token, 0 when absent."""
    pairs = list(bags)
    index = {t: j for j, t in enumerate(vocab.tokens)}
    values = np.zeros((len(pairs), len(index)), dtype=np.int64)
    for i, (_, bag) in enumerate(pairs):
        for tok, freq in bag.items():
            j = index.get(tok)
            if j is not None:
                values[i, j] = freq
    return FeatureMatrix([a for a, _ in pairs], list(vocab.tokens), values)


def flow2vec(report: MinerReport | None) -> FlowVector:
    """Occurrences of each flow category, in the fixed column order."""
    if report is None:
        return FlowVector.zero()
    counts = Counter(f.category for f in report.flows)
    return FlowVector(tuple(counts.get(c, 0) for c in FlowCategory))


def combine(token_matrix: FeatureMatrix, flow_vectors: Sequence[tuple[str, FlowVector]]) -> FeatureMatrix:
    """Append the six flow columns to a token matrix over the same apps."""
    apps = [a for a, _ in flow_vectors]
    if apps != token_matrix.row_labels:
        raise AppSetMismatch("token rows and flow vectors cover different apps or orders")
    flows = np.array([list(v) for _, v in flow_vectors], dtype=np.int64).reshape(len(apps), len(FLOW_COLUMNS))
    return FeatureMatrix(
        list(token_matrix.row_labels),
        [*token_matrix.column_labels, *FLOW_COLUMNS],
        np.hstack([token_matrix.values, flows]),
        token_matrix.labels,
    )
