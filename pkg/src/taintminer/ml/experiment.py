"""Split, train and evaluate several classifiers on one feature matrix."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from ..errors import DegenerateTraining
from ..vectorizer import FeatureMatrix
from .metrics import EvalEntry
from .models import Model, evaluate, train
from .split import Dataset, SplitConfig, stratified_split

__all__ = ["SHORT_NAMES", "Experiment", "run_experiment", "format_table"]

SHORT_NAMES = {
    "logreg": "logistic_regression",
    "nb": "naive_bayes",
    "knn": "knn",
    "tree": "decision_tree",
}


@dataclass
class Experiment:
    features: str
    split: SplitConfig
    models: dict[str, Model] = field(default_factory=dict)
    results: dict[str, EvalEntry] = field(default_factory=dict)
    test_apps: list[str] = field(default_factory=list)
    columns: list[str] = field(default_factory=list)

    def to_json(self) -> dict[str, dict[str, object]]:
        return {name: entry.to_json() for name, entry in self.results.items()}

    def best_auc(self) -> float:
        aucs = [e.auc for e in self.results.values() if not math.isnan(e.auc)]
        return max(aucs) if aucs else math.nan


def run_experiment(
    fm: FeatureMatrix,
    features: str = "bow+flows",
    split: SplitConfig = SplitConfig(),
    kinds: list[str] | None = None,
    k: int = 5,
) -> Experiment:
    """Hold out a stratified test set, train each classifier, score it on the test set."""
    kinds = list(kinds or SHORT_NAMES)
    data = Dataset(fm.select(features))
    train_ds, test_ds = stratified_split(data, split)
    exp = Experiment(features, split, test_apps=list(test_ds.features.row_labels), columns=list(data.features.column_labels))
    for short in kinds:
        kind = SHORT_NAMES.get(short, short)
        params = {"k": k} if kind == "knn" else {}
        with warnings.catch_warnings():
            warnings.simplefilter("always", DegenerateTraining)
            model = train(train_ds, kind, **params)
        exp.models[short] = model
        exp.results[short] = evaluate(model, test_ds)
    return exp


def format_table(results: dict[str, EvalEntry]) -> str:
    head = f"{'classifier':<10} {'tp':>4} {'tn':>4} {'fp':>4} {'fn':>4} {'accuracy':>9} {'f1':>7} {'mcc':>7} {'auc':>7}"
    rows = [head]
    for name, e in results.items():
        c = e.confusion
        auc = "n/a" if math.isnan(e.auc) else f"{e.auc:.4f}"
        rows.append(
            f"{name:<10} {c.tp:>4} {c.tn:>4} {c.fp:>4} {c.fn:>4} {e.accuracy:>9.4f} {e.f1:>7.4f} {e.mcc:>7.4f} {auc:>7}"
        )
    return "\n".join(rows)
