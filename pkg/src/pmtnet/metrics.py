"""Confusion matrices and per-class scores."""
from __future__ import annotations

import numpy as np

from .errors import DataError

N_CLASSES = 5


def confusion(true_labels, predicted_labels, n_classes: int = N_CLASSES) -> np.ndarray:
    """Counts with rows = true label, columns = predicted label."""
    t = np.asarray(true_labels, dtype=np.int64)
    p = np.asarray(predicted_labels, dtype=np.int64)
    if t.shape != p.shape or t.ndim != 1:
        raise DataError(f"label arrays differ: {t.shape} vs {p.shape}")
    if t.size and (min(t.min(), p.min()) < 0 or max(t.max(), p.max()) >= n_classes):
        raise DataError(f"labels must lie in [0, {n_classes})")
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (t, p), 1)
    return cm


def _check(cm):
    cm = np.asarray(cm)
    if cm.sum() == 0:
        raise DataError("empty confusion matrix")
    return cm


def _ratio(a, b):
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    return np.divide(a, b, out=np.zeros_like(a), where=b > 0)


def precision_recall(cm):
    cm = _check(cm)
    tp = np.diag(cm)
    return _ratio(tp, cm.sum(axis=0)), _ratio(tp, cm.sum(axis=1))


def f1_per_class(cm) -> np.ndarray:
    """Per-class F1 with 0/0 taken as 0."""
    prec, rec = precision_recall(cm)
    return _ratio(2 * prec * rec, prec + rec)


def accuracy_per_class(cm) -> np.ndarray:
    """One-vs-rest accuracy (TP + TN) / total for every class."""
    cm = _check(cm)
    total = cm.sum()
    tp = np.diag(cm)
    fp = cm.sum(axis=0) - tp
    fn = cm.sum(axis=1) - tp
    return (total - fp - fn) / total


def overall_accuracy(cm) -> float:
    cm = _check(cm)
    return float(np.trace(cm) / cm.sum())


def macro_f1(cm) -> float:
    return float(f1_per_class(cm).mean())


def kmeans(x: np.ndarray, k: int, seed: int = 0, restarts: int = 10) -> np.ndarray:
    """Cluster assignments from the lowest-distortion of ``restarts`` seeded
    k-means++ runs."""
    from scipy.cluster.vq import kmeans2

    x = np.asarray(x, dtype=np.float64)
    best = None
    for r in range(restarts):
        centers, assign = kmeans2(x, k, minit="++", seed=seed * 1000 + r)
        inertia = float(np.sum((x - centers[assign]) ** 2))
        if best is None or inertia < best[0]:
            best = (inertia, assign)
    return best[1]


def purity(assignments, labels) -> float:
    """Fraction of points whose cluster's majority label equals their own."""
    a = np.asarray(assignments)
    y = np.asarray(labels)
    hits = sum(np.bincount(y[a == c]).max() for c in np.unique(a))
    return float(hits / len(y))


METHOD_NAMES = ("knn", "svm", "cnn")


def report_text(results: dict, class_names) -> str:
    """Per-class F1 and one-vs-rest accuracy per method, laid out like a
    classifier comparison table."""
    width = max(len(n) for n in class_names) + 2
    head = "measure".ljust(10) + "".join(n.rjust(width) for n in class_names)
    lines = [head, "-" * len(head), "F1-score"]
    for name, cm in results.items():
        lines.append(f"  {name:<8}" + "".join(f"{v:{width}.3f}" for v in f1_per_class(cm)))
    lines.append("Accuracy")
    for name, cm in results.items():
        lines.append(f"  {name:<8}" + "".join(f"{v:{width}.3f}" for v in accuracy_per_class(cm)))
    lines.append("Overall")
    for name, cm in results.items():
        lines.append(f"  {name:<8} accuracy {overall_accuracy(cm):.4f}  macro-F1 {macro_f1(cm):.4f}")
    return "\n".join(lines) + "\n"


def report_keyvalue(results: dict, class_names) -> str:
    lines = []
    for name, cm in results.items():
        for cls, v in zip(class_names, f1_per_class(cm)):
            lines.append(f"{name}.f1.{cls}={float(v)!r}")
        for cls, v in zip(class_names, accuracy_per_class(cm)):
            lines.append(f"{name}.accuracy.{cls}={float(v)!r}")
        lines.append(f"{name}.overall_accuracy={overall_accuracy(cm)!r}")
        lines.append(f"{name}.macro_f1={macro_f1(cm)!r}")
    return "\n".join(lines) + "\n"
