"""Classifiers, the holdout split and evaluation metrics."""

from .experiment import SHORT_NAMES, Experiment, format_table, run_experiment
from .metrics import ConfusionMatrix, EvalEntry, auc_rank, auc_trapezoid, confusion
from .models import (
    MODEL_KINDS,
    DecisionTree,
    KNearestNeighbors,
    LogisticRegression,
    Model,
    NaiveBayes,
    evaluate,
    train,
)
from .split import Dataset, SplitConfig, class_quotas, stratified_split

__all__ = [
    "ConfusionMatrix",
    "EvalEntry",
    "auc_rank",
    "auc_trapezoid",
    "confusion",
    "MODEL_KINDS",
    "DecisionTree",
    "KNearestNeighbors",
    "LogisticRegression",
    "Model",
    "NaiveBayes",
    "evaluate",
    "train",
    "Dataset",
    "SplitConfig",
    "class_quotas",
    "stratified_split",
    "SHORT_NAMES",
    "Experiment",
    "format_table",
    "run_experiment",
]
