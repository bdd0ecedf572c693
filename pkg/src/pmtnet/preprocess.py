"""Log scaling and cyclic column centering of event grids.

Both transforms act on the last two axes, so a single (8, 24) grid and an
(n, 8, 24) stack are handled alike.
"""
from __future__ import annotations

import numpy as np

from .errors import ConfigError, DomainError

SCALE = 10.0
CENTER_COLUMN = 12


def log_scale(grid: np.ndarray) -> np.ndarray:
    """``ln(1 + q) / 10``; charges up to e**10 - 1 map into [0, 1]."""
    q = np.asarray(grid, dtype=np.float64)
    if np.any(q < 0) or not np.all(np.isfinite(q)):
        raise DomainError("charges must be finite and non-negative")
    return np.log1p(q) / SCALE


def argmax_column(grid: np.ndarray) -> np.ndarray | int:
    """Column of the global maximum; ties go to the lowest column index."""
    col_max = np.asarray(grid).max(axis=-2)
    c = col_max.argmax(axis=-1)
    return int(c) if np.ndim(c) == 0 else c


def center_columns(grid: np.ndarray):
    """Rotate columns so the global maximum sits in column 12.

    Returns ``(rotated, shift)`` where ``rotated = np.roll(grid, shift, axis=-1)``.
    For stacks, ``shift`` is an integer array with one entry per grid.
    """
    g = np.asarray(grid, dtype=np.float64)
    shift = (CENTER_COLUMN - argmax_column(g)) % g.shape[-1]
    if np.ndim(shift) == 0:
        return np.roll(g, int(shift), axis=-1), int(shift)
    cols = np.arange(g.shape[-1])
    src = (cols[None, :] - shift[:, None]) % g.shape[-1]
    return np.take_along_axis(g, src[:, None, :], axis=-1), shift


def prepare(grids: np.ndarray, path: str) -> np.ndarray:
    """``supervised``: log-scale then center; ``unsupervised``: log-scale only."""
    out = log_scale(grids)
    if path == "supervised":
        out, _ = center_columns(out)
    elif path != "unsupervised":
        raise ConfigError(f"unknown preprocessing path {path!r}")
    return out
