"""File output: fixed-format CSV, JSON metadata and standalone SVG plots.

Numbers are written as ``%.8e`` (nine significant digits, fixed width), so
re-reading a file and writing it again reproduces it byte for byte.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

NUMBER_FORMAT = "{:.8e}"


def fmt(x: float) -> str:
    return NUMBER_FORMAT.format(float(x))


def write_table(path: Path, header: list[str], columns) -> Path:
    """Write equal-length numeric columns under ``header``."""
    path = Path(path)
    cols = [np.asarray(c, dtype=float).ravel() for c in columns]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([fmt(x) for x in row])
    return path


def write_joint(path: Path, o1: np.ndarray, o2: np.ndarray, p: np.ndarray) -> Path:
    """Joint grid in long format ``o1,o2,p`` with o2 varying fastest."""
    g1, g2 = np.meshgrid(o1, o2, indexing="ij")
    return write_table(path, ["o1", "o2", "p"], [g1, g2, p])


def write_rows(path: Path, header: list[str], rows: list[list]) -> Path:
    """Mixed text/number rows; floats use the fixed number format."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) if isinstance(x, (float, np.floating)) else x for x in row])
    return path


def read_table(path: Path) -> tuple[list[str], np.ndarray]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(x) for x in r] for r in rows[1:]])


def read_joint(path: Path):
    """Inverse of :func:`write_joint`: returns (o1, o2, p)."""
    _, data = read_table(path)
    o1 = np.unique(data[:, 0])
    o2 = np.unique(data[:, 1])
    return o1, o2, data[:, 2].reshape(len(o1), len(o2))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if np.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_json(path: Path, data: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")
    return path


# --- SVG ---------------------------------------------------------------

_DIVERGING = ((33, 102, 172), (247, 247, 247), (178, 24, 43))


def _colour(t: float) -> str:
    """Blue-white-red for t in [-1, 1]."""
    t = float(np.clip(t, -1, 1))
    lo, mid, hi = _DIVERGING
    a, b = (mid, hi) if t >= 0 else (mid, lo)
    s = abs(t)
    r, g, bl = (round(a[k] + s * (b[k] - a[k])) for k in range(3))
    return f"#{r:02x}{g:02x}{bl:02x}"


def svg_heatmap(path: Path, o1: np.ndarray, o2: np.ndarray, values: np.ndarray,
                title: str = "", max_cells: int = 128, size: int = 480) -> Path:
    """Rectangle-fill heatmap; values are scaled by their largest magnitude."""
    step1 = max(1, int(np.ceil(len(o1) / max_cells)))
    step2 = max(1, int(np.ceil(len(o2) / max_cells)))
    v = np.asarray(values)[::step1, ::step2]
    n1, n2 = v.shape
    scale = float(np.nanmax(np.abs(v))) or 1.0
    cw, ch = size / n1, size / n2
    margin = 40
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size + 2 * margin}" '
             f'height="{size + 2 * margin}">',
             f'<text x="{margin}" y="{margin - 12}" font-size="14">{title}</text>']
    for i in range(n1):
        for j in range(n2):
            x = margin + i * cw
            y = margin + (n2 - 1 - j) * ch
            c = "#cccccc" if not np.isfinite(v[i, j]) else _colour(v[i, j] / scale)
            parts.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{cw + 0.05:.2f}" '
                         f'height="{ch + 0.05:.2f}" fill="{c}"/>')
    parts.append(f'<text x="{margin}" y="{size + margin + 16}" font-size="12">'
                 f'O1 [{o1[0]:.3g}, {o1[-1]:.3g}]  O2 [{o2[0]:.3g}, {o2[-1]:.3g}]</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")
    return Path(path)


_LINE_COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def svg_lines(path: Path, curves: list[tuple[np.ndarray, np.ndarray, str]],
              title: str = "", width: int = 560, height: int = 360) -> Path:
    """Polyline plot of (x, y, label) curves on shared axes."""
    margin = 40
    xs = np.concatenate([np.asarray(c[0], float) for c in curves])
    ys = np.concatenate([np.asarray(c[1], float) for c in curves])
    ok = np.isfinite(ys)
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys[ok].min()), float(ys[ok].max())
    if y1 == y0:
        y1 = y0 + 1.0
    if x1 == x0:
        x1 = x0 + 1.0
    def px(x):
        return margin + (x - x0) / (x1 - x0) * (width - 2 * margin)

    def py(y):
        return height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<text x="{margin}" y="{margin - 16}" font-size="14">{title}</text>',
             f'<rect x="{margin}" y="{margin}" width="{width - 2 * margin}" '
             f'height="{height - 2 * margin}" fill="none" stroke="#888"/>']
    for k, (x, y, label) in enumerate(curves):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        good = np.isfinite(y)
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x[good], y[good]))
        col = _LINE_COLOURS[k % len(_LINE_COLOURS)]
        parts.append(f'<polyline fill="none" stroke="{col}" stroke-width="1.5" points="{pts}"/>')
        parts.append(f'<text x="{width - margin - 150}" y="{margin + 14 * (k + 1)}" '
                     f'font-size="11" fill="{col}">{label}</text>')
    parts.append(f'<text x="{margin}" y="{height - 10}" font-size="11">'
                 f'x [{x0:.3g}, {x1:.3g}]  y [{y0:.3g}, {y1:.3g}]</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")
    return Path(path)
