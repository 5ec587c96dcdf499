"""Labeled datasets and the stratified holdout split."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from ..errors import ClassTooSmall
from ..vectorizer import VULNERABLE, FeatureMatrix

__all__ = ["Dataset", "SplitConfig", "stratified_split", "class_quotas"]


@dataclass
class Dataset:
    features: FeatureMatrix
    positive_class: str = VULNERABLE

    def __post_init__(self) -> None:
        if self.features.labels is None:
            raise ValueError("a dataset needs a label on every row")

    @property
    def X(self) -> np.ndarray:
        return self.features.values.astype(float)

    @property
    def y(self) -> np.ndarray:
        return np.array([lab == self.positive_class for lab in self.features.labels], dtype=bool)

    def __len__(self) -> int:
        return len(self.features.row_labels)

    def subset(self, idx) -> Dataset:
        return Dataset(self.features.rows(idx), self.positive_class)


@dataclass(frozen=True)
class SplitConfig:
    train_fraction: float = 0.70
    seed: int = 42
    stratify: bool = True

    def __post_init__(self) -> None:
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie strictly between 0 and 1")


def class_quotas(sizes: dict[str, int], fraction: float) -> dict[str, int]:
    """Training rows per class: floors first, leftovers to the largest remainders.

    The quotas add up to ``round(n * fraction)`` so the split size does not
    depend on how many classes there are.
    """
    n = sum(sizes.values())
    target = math.floor(n * fraction + 0.5)
    exact = {c: k * fraction for c, k in sizes.items()}
    quota = {c: math.floor(v) for c, v in exact.items()}
    order = sorted(sizes, key=lambda c: (-(exact[c] - quota[c]), c))
    for c in order[: max(0, target - sum(quota.values()))]:
        quota[c] += 1
    return quota


def stratified_split(ds: Dataset, cfg: SplitConfig = SplitConfig()) -> tuple[Dataset, Dataset]:
    """Holdout split keeping each class's share in both halves.

    Raises :class:`ClassTooSmall` when a class has fewer than two rows.
    """
    labels = list(ds.features.labels)
    rng = np.random.default_rng(cfg.seed)
    if not cfg.stratify:
        order = rng.permutation(len(labels))
        k = math.floor(len(labels) * cfg.train_fraction + 0.5)
        return ds.subset(sorted(order[:k])), ds.subset(sorted(order[k:]))

    sizes = Counter(labels)
    small = sorted(c for c, k in sizes.items() if k < 2)
    if small:
        raise ClassTooSmall(f"classes with fewer than 2 rows: {', '.join(small)}")
    quota = class_quotas(dict(sizes), cfg.train_fraction)
    train: list[int] = []
    test: list[int] = []
    for c in sorted(sizes):
        rows = np.array([i for i, lab in enumerate(labels) if lab == c])
        rows = rows[rng.permutation(len(rows))]
        train.extend(rows[: quota[c]].tolist())
        test.extend(rows[quota[c] :].tolist())
    return ds.subset(sorted(train)), ds.subset(sorted(test))
