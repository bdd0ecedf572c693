"""Byte-deterministic SVG output: labeled scatter plots and charge heat maps."""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .synth import CLASS_NAMES

CLASS_COLORS = ("#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#7f7f7f")
_VIRIDIS = np.array([
    [68, 1, 84], [59, 82, 139], [33, 145, 140], [94, 201, 98], [253, 231, 37],
], dtype=np.float64)


def _num(v: float) -> str:
    return f"{v:.3f}"


def _color(v: float) -> str:
    t = min(max(float(v), 0.0), 1.0) * (len(_VIRIDIS) - 1)
    i = min(int(t), len(_VIRIDIS) - 2)
    rgb = _VIRIDIS[i] + (t - i) * (_VIRIDIS[i + 1] - _VIRIDIS[i])
    return "#%02x%02x%02x" % tuple(int(round(c)) for c in rgb)


def _header(width: float, height: float) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_num(width)}" height="{_num(height)}" '
        f'viewBox="0 0 {_num(width)} {_num(height)}">',
        f'<rect x="0" y="0" width="{_num(width)}" height="{_num(height)}" fill="#ffffff"/>',
    ]


def scatter_svg(points: np.ndarray, labels, title: str = "", size: float = 480.0, margin: float = 30.0) -> str:
    """2-D scatter with one fixed color per class and a legend.

    Each point is one ``<circle class="point">`` element, emitted in input
    order. Only the first two coordinates are drawn.
    """
    pts = np.asarray(points, dtype=np.float64)[:, :2]
    labels = np.asarray(labels, dtype=np.int64)
    legend_w = 120.0
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = np.where(hi - lo > 0, hi - lo, 1.0)
    xy = margin + (pts - lo) / span * (size - 2 * margin)
    xy[:, 1] = size - xy[:, 1]  # SVG y axis points down
    out = _header(size + legend_w, size)
    if title:
        out.append(f'<text x="{_num(margin)}" y="{_num(margin * 0.6)}" font-size="14">{escape(title)}</text>')
    for (x, y), lab in zip(xy, labels):
        out.append(f'<circle class="point" cx="{_num(x)}" cy="{_num(y)}" r="2.5" fill="{CLASS_COLORS[lab]}"/>')
    for k, name in enumerate(CLASS_NAMES):
        y = margin + 20.0 * k
        out.append(f'<rect x="{_num(size + 5)}" y="{_num(y - 9)}" width="10" height="10" fill="{CLASS_COLORS[k]}"/>')
        out.append(f'<text x="{_num(size + 20)}" y="{_num(y)}" font-size="12">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def heatmap_rows_svg(rows: list[list[np.ndarray]], captions: list[str] | None = None, cell: float = 12.0, gap: float = 16.0) -> str:
    """Grid of 8x24 heat maps on the shared color scale [0, 1].

    ``rows[r][c]`` is the grid drawn in panel row ``r``, column ``c``; each
    grid is 192 ``<rect class="cell">`` elements.
    """
    n_rows = len(rows)
    n_cols = max(len(r) for r in rows)
    pw, ph = 24 * cell, 8 * cell
    width = n_cols * pw + (n_cols + 1) * gap
    height = n_rows * (ph + gap) + gap + (14.0 if captions else 0.0)
    out = _header(width, height)
    for r, panel_row in enumerate(rows):
        for c, grid in enumerate(panel_row):
            x0 = gap + c * (pw + gap)
            y0 = gap + r * (ph + gap)
            out.append(f'<g class="grid" transform="translate({_num(x0)},{_num(y0)})">')
            for i in range(8):
                for j in range(24):
                    out.append(
                        f'<rect class="cell" x="{_num(j * cell)}" y="{_num(i * cell)}" '
                        f'width="{_num(cell)}" height="{_num(cell)}" fill="{_color(grid[i, j])}"/>'
                    )
            out.append("</g>")
    if captions:
        for c, text in enumerate(captions):
            x0 = gap + c * (pw + gap)
            out.append(f'<text x="{_num(x0)}" y="{_num(height - 4)}" font-size="11">{escape(text)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
