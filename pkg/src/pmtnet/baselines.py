"""k-nearest-neighbor and linear one-vs-rest SVM baselines on flattened grids."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError, StateError
from .tensor import Prng

N_CLASSES = 5


def _flat(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return x.reshape(x.shape[0], int(np.prod(x.shape[1:])))


@dataclass
class KnnModel:
    vectors: np.ndarray
    labels: np.ndarray
    k: int = 5

    @classmethod
    def fit(cls, data, labels, k: int = 5) -> "KnnModel":
        x = _flat(data)
        y = np.asarray(labels, dtype=np.int64)
        if len(x) == 0:
            raise StateError("k-NN needs at least one training vector")
        if k < 1 or k > len(x):
            raise ConfigError(f"k={k} outside [1, {len(x)}]")
        return cls(x, y, int(k))


def knn_classify(model: KnnModel, queries, chunk: int = 16) -> np.ndarray:
    """Majority vote over the k Euclidean-nearest training vectors.

    Distance ties go to the lower training index; vote ties go to the tied
    class whose nearest member is closest. Accepts one query or a stack.
    """
    if model.vectors is None or len(model.vectors) == 0:
        raise StateError("empty k-NN model")
    q = np.asarray(queries, dtype=np.float64)
    single = q.size == model.vectors.shape[1]
    q = q.reshape(1, -1) if single else _flat(q)
    k = min(model.k, len(model.vectors))
    out = np.empty(len(q), dtype=np.int64)
    for s in range(0, len(q), chunk):
        diff = q[s : s + chunk, None, :] - model.vectors[None]
        d = np.einsum("qnd,qnd->qn", diff, diff)
        nearest = np.argsort(d, axis=1, kind="stable")[:, :k]
        for r, idx in enumerate(nearest):
            votes = np.bincount(model.labels[idx], minlength=N_CLASSES)
            tied = np.flatnonzero(votes == votes.max())
            if len(tied) == 1:
                out[s + r] = tied[0]
            else:
                # neighbors are sorted by distance: first tied class seen wins
                out[s + r] = next(lab for lab in model.labels[idx] if lab in tied)
    return int(out[0]) if single else out


@dataclass
class SvmModel:
    weights: np.ndarray  # (n_classes, d)
    bias: np.ndarray  # (n_classes,)
    lam: float = 1e-3


def svm_train(data, labels, lam: float = 1e-3, epochs: int = 200, seed: int = 0, batch_size: int | None = None) -> SvmModel:
    """One-vs-rest linear SVMs by Pegasos subgradient descent.

    Minimizes ``lam/2 * ||w||^2 + mean(hinge)`` per class with step size
    ``1 / (lam * t)`` and projection onto the ball of radius ``1/sqrt(lam)``.
    The bias is learned as the weight of a constant feature. Each epoch
    visits the data in seeded shuffled mini-batches of ``batch_size``; the
    default (``None``) uses the whole set as one batch, which makes the
    result independent of seed and of data multiplicity.
    """
    x = _flat(data)
    y = np.asarray(labels, dtype=np.int64)
    if len(np.unique(y)) < 2:
        raise DataError("SVM training needs at least two classes")
    if lam <= 0 or epochs < 1:
        raise ConfigError("lam and epochs must be positive")
    n = len(x)
    xa = np.hstack([x, np.ones((n, 1))])
    signs = np.where(y[:, None] == np.arange(N_CLASSES)[None], 1.0, -1.0)
    w = np.zeros((N_CLASSES, xa.shape[1]))
    radius = 1.0 / np.sqrt(lam)
    bs = n if batch_size is None else int(batch_size)
    root = Prng(seed)
    t = 0
    for epoch in range(epochs):
        order = np.arange(n) if bs >= n else root.spawn(epoch).permutation(n)
        for start in range(0, n, bs):
            idx = order[start : start + bs]
            t += 1
            eta = 1.0 / (lam * t)
            margins = signs[idx] * (xa[idx] @ w.T)
            active = (margins < 1.0) * signs[idx]  # (b, classes)
            w = (1.0 - eta * lam) * w + (eta / len(idx)) * (active.T @ xa[idx])
            norms = np.linalg.norm(w, axis=1, keepdims=True)
            w *= np.minimum(1.0, radius / np.maximum(norms, 1e-300))
    return SvmModel(w[:, :-1].copy(), w[:, -1].copy(), float(lam))


def svm_scores(model: SvmModel, queries) -> np.ndarray:
    q = np.asarray(queries, dtype=np.float64)
    q = q.reshape(-1, model.weights.shape[1])
    return q @ model.weights.T + model.bias


def svm_predict(model: SvmModel, queries):
    """Argmax over one-vs-rest scores; ties go to the lowest class index."""
    q = np.asarray(queries, dtype=np.float64)
    labels = svm_scores(model, q).argmax(axis=1)
    return int(labels[0]) if q.size == model.weights.shape[1] else labels
