"""Plain-text artifacts: level-curve CSV, PGM masks, key=value reports and SVG sweeps."""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path

import numpy as np

from .levels import COMPACT, LevelCurve

CSV_COLUMNS = ("level", "vertexIndex", "r", "theta", "segmentLength")


def fmt(x) -> str:
    """Fixed, platform-independent number formatting for every artifact."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.10g}"
    return str(x)


def curves_csv(curves: list[LevelCurve], period: float) -> str:
    """Vertices of closed curves (the closing duplicate dropped); segmentLength runs to the next vertex."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for c in curves:
        n = c.r.size - 1 if c.closed else c.r.size
        seg = c.segment_lengths
        for i in range(n):
            s = seg[i] if i < seg.size else 0.0
            w.writerow([fmt(c.level), i, fmt(c.r[i]), fmt(float(np.mod(c.theta[i], period))), fmt(s)])
    return buf.getvalue()


def mask_pgm(labels: np.ndarray, comment: str = "") -> str:
    """ASCII PGM (P2) of an integer label grid; rows are r from the top of the file down to the boundary."""
    grid = np.asarray(labels, dtype=int)[::-1]
    top = max(int(grid.max()), 1)
    lines = ["P2"]
    if comment:
        lines.append(f"# {comment}")
    lines.append(f"{grid.shape[1]} {grid.shape[0]}")
    lines.append(str(top))
    lines.extend(" ".join(str(v) for v in row) for row in grid)
    return "\n".join(lines) + "\n"


def report_lines(entries) -> str:
    """``key=value`` pairs, one record per line, in the given order."""
    out = []
    for rec in entries:
        out.append(" ".join(f"{k}={fmt(v)}" for k, v in rec.items()))
    return "\n".join(out) + "\n"


def check_line(name: str, status: str, value, bound) -> str:
    return f"check={name} status={status} value={fmt(value)} bound={fmt(bound)}"


def sweep_svg(curves: list[LevelCurve], period: float, r_max: float, labels: np.ndarray | None = None,
              width: int = 800, height: int = 600) -> str:
    """Level curves in the (t, r) chart, t to the right and r upwards; arm cells shaded."""
    pad = 20
    sx = (width - 2 * pad) / period
    sy = (height - 2 * pad) / r_max
    X = lambda t: pad + t * sx
    Y = lambda r: height - pad - r * sy
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}">',
             f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" '
             'fill="white" stroke="black"/>']
    if labels is not None:
        n_r, n_t = labels.shape
        hr = r_max / (n_r - 1)
        ht = period / n_t
        for i in range(n_r):
            row = labels[i] > 0
            if not row.any():
                continue
            edges = np.flatnonzero(np.diff(np.concatenate([[0], row.astype(int), [0]])))
            for a, b in zip(edges[::2], edges[1::2]):
                parts.append(f'<rect x="{X(a * ht):.2f}" y="{Y((i + 0.5) * hr):.2f}" '
                             f'width="{(b - a) * ht * sx:.2f}" height="{hr * sy:.2f}" fill="#f4c27a"/>')
    for c in curves:
        colour = "#c0392b" if c.component_class == COMPACT else "#1f4e79"
        t = np.mod(c.theta, period)
        # break the polyline where it wraps across the seam
        cuts = np.flatnonzero(np.abs(np.diff(t)) > 0.5 * period) + 1
        for seg_r, seg_t in zip(np.split(c.r, cuts), np.split(t, cuts)):
            if seg_r.size < 2:
                continue
            pts = " ".join(f"{X(a):.2f},{Y(b):.2f}" for a, b in zip(seg_t, seg_r))
            parts.append(f'<polyline points="{pts}" fill="none" stroke="{colour}" stroke-width="1"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
