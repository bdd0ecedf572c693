"""Exact O(N^2) t-SNE.

Gaussian input affinities are calibrated per point to a target perplexity
by bisection on the precision beta = 1/(2 sigma^2); the embedding minimizes
KL(P || Q) under a Student-t (one degree of freedom) output kernel by
gradient descent with momentum and early exaggeration.
"""
from __future__ import annotations

import numpy as np

from .errors import ConfigError, ShapeError
from .tensor import Prng

DIST_FLOOR = 1e-12
Q_FLOOR = 1e-12


def squared_distances(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    sq = np.einsum("ij,ij->i", x, x)
    d = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d, 0.0, out=d)
    np.fill_diagonal(d, 0.0)
    return d


def _row_probs(d: np.ndarray, beta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # d: (n, n-1) distances to the other points, shifted so each row's minimum is 0
    p = np.exp(-beta[:, None] * d)
    p /= np.maximum(p.sum(axis=1, keepdims=True), DIST_FLOOR)
    logp = np.log2(np.where(p > 0, p, 1.0))
    h = -np.sum(p * logp, axis=1)
    return p, 2.0**h


def conditional_affinities(x: np.ndarray, perplexity: float = 30.0, max_steps: int = 64, tol: float = 1e-6):
    """Symmetric joint affinities ``P = (P_cond + P_cond.T) / (2N)``.

    Returns ``(P, row_perplexity)`` where ``row_perplexity[i]`` is the
    achieved perplexity of conditional row ``i``.
    """
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    if x.ndim != 2 or n < 4:
        raise ShapeError("need an (N, D) array with N >= 4")
    if not 0 < perplexity < n:
        raise ConfigError(f"perplexity {perplexity} must lie in (0, {n})")
    d = np.maximum(squared_distances(x), DIST_FLOOR)
    off = ~np.eye(n, dtype=bool)
    d = d[off].reshape(n, n - 1)
    d = d - d.min(axis=1, keepdims=True)

    beta = np.ones(n)
    lo = np.zeros(n)
    hi = np.full(n, np.inf)
    p, perp = _row_probs(d, beta)
    for _ in range(max_steps):
        err = perp - perplexity
        todo = np.abs(err) > tol
        if not todo.any():
            break
        sharpen = todo & (err > 0)
        soften = todo & (err < 0)
        lo[sharpen] = beta[sharpen]
        hi[soften] = beta[soften]
        beta = np.where(sharpen & np.isinf(hi), beta * 2.0, beta)
        beta = np.where(todo & np.isfinite(hi), 0.5 * (lo + hi), beta)
        p_new, perp_new = _row_probs(d[todo], beta[todo])
        p[todo], perp[todo] = p_new, perp_new

    cond = np.zeros((n, n))
    cond[off] = p.ravel()
    joint = (cond + cond.T) / (2.0 * n)
    return joint, perp


def q_matrix(y: np.ndarray):
    """Student-t joint affinities Q and the unnormalized kernel ``1/(1+d^2)``."""
    num = 1.0 / (1.0 + squared_distances(y))
    np.fill_diagonal(num, 0.0)
    return num / num.sum(), num


def kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    """``sum P ln(P/Q)`` with 0 ln 0 = 0 and Q floored at 1e-12."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ShapeError(f"P {p.shape} vs Q {q.shape}")
    mask = p > 0
    return float(np.sum(p[mask] * np.log(p[mask] / np.maximum(q[mask], Q_FLOOR))))


def kl_gradient(p: np.ndarray, y: np.ndarray) -> np.ndarray:
    """``dC/dy_i = 4 sum_j (P_ij - Q_ij)(y_i - y_j) / (1 + |y_i - y_j|^2)``."""
    q, num = q_matrix(y)
    w = (p - q) * num
    return 4.0 * (w.sum(axis=1)[:, None] * y - w @ y)


def tsne_embed(
    p: np.ndarray,
    d: int = 2,
    iters: int = 1000,
    learning_rate: float = 100.0,
    momentum: tuple[float, float] = (0.5, 0.8),
    momentum_switch: int = 250,
    exaggeration_factor: float = 4.0,
    exaggeration_iters: int = 100,
    seed: int = 0,
):
    """Embed joint affinities ``p``; returns ``(Y, kl_trace)``.

    ``kl_trace[t]`` is KL(P || Q) (un-exaggerated) after iteration ``t``.
    """
    n = len(p)
    if p.shape != (n, n):
        raise ShapeError(f"affinity matrix must be square, got {p.shape}")
    if d not in (2, 3):
        raise ConfigError("embedding dimension must be 2 or 3")
    y = 1e-4 * Prng(seed).normal(n * d).reshape(n, d)
    update = np.zeros_like(y)
    trace = []
    for t in range(iters):
        pe = p * exaggeration_factor if t < exaggeration_iters else p
        mu = momentum[0] if t < momentum_switch else momentum[1]
        update = mu * update - learning_rate * kl_gradient(pe, y)
        y = y + update
        y -= y.mean(axis=0)
        trace.append(kl_divergence(p, q_matrix(y)[0]))
    return y, np.array(trace)


def embed_features(x: np.ndarray, perplexity: float = 30.0, **kwargs):
    """Affinities plus embedding in one call; perplexity is capped below N."""
    perplexity = min(perplexity, (len(x) - 1) / 3.0)
    p, _ = conditional_affinities(x, perplexity)
    return tsne_embed(p, **kwargs)
