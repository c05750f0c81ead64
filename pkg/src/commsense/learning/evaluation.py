"""Accuracy, confusion matrices and cluster-separation scores."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pca import PcaModel, as_matrix, pca_project
from .svm import SvmModel, svm_predict

__all__ = ["AccuracyReport", "confusion_report", "evaluate_accuracy", "silhouette_score"]


@dataclass(frozen=True, eq=False)
class AccuracyReport:
    """Rows of ``confusion`` are true classes, columns predicted classes."""

    classes: tuple[str, ...]
    confusion: np.ndarray
    accuracy: float
    recall: np.ndarray

    @property
    def total(self) -> int:
        return int(self.confusion.sum())


def confusion_report(classes, y_true, y_pred) -> AccuracyReport:
    classes = tuple(classes)
    index = {c: k for k, c in enumerate(classes)}
    cm = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        if t not in index:
            raise ValueError(f"unknown label {t!r}; model classes are {classes}")
        cm[index[t], index[p]] += 1
    support = cm.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        recall = np.where(support > 0, np.diag(cm) / np.maximum(support, 1), np.nan)
    return AccuracyReport(classes, cm, float(np.trace(cm) / cm.sum()), recall)


def evaluate_accuracy(model: SvmModel, pca: PcaModel, test) -> AccuracyReport:
    """Project test CsiVectors with the frozen PCA, predict, and tally."""
    test = list(test)
    if not test:
        raise ValueError("test set is empty")
    unknown = {v.label for v in test} - set(model.classes)
    if unknown:
        raise ValueError(f"unknown labels {sorted(unknown)}; model classes are {model.classes}")
    Z = pca_project(pca, as_matrix(test))
    return confusion_report(model.classes, [v.label for v in test], svm_predict(model, Z))


def silhouette_score(points: np.ndarray, labels) -> float:
    """Mean silhouette with Euclidean distance; singleton clusters score 0."""
    X = np.asarray(points, dtype=float)
    labels = np.asarray(labels)
    uniq = sorted(set(labels.tolist()))
    if len(uniq) < 2:
        raise ValueError("silhouette needs at least 2 clusters")
    D = np.sqrt(np.maximum(((X[:, None, :] - X[None, :, :]) ** 2).sum(-1), 0.0))
    masks = [labels == c for c in uniq]
    s = np.zeros(len(X))
    for k, m in enumerate(masks):
        size = m.sum()
        if size < 2:
            continue
        a = D[np.ix_(m, m)].sum(1) / (size - 1)
        b = np.min([D[np.ix_(m, o)].mean(1) for j, o in enumerate(masks) if j != k], axis=0)
        denom = np.maximum(a, b)
        s[m] = np.where(denom > 0, (b - a) / np.where(denom > 0, denom, 1.0), 0.0)
    return float(s.mean())
