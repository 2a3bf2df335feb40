"""Dependency-free SVG rendering of training-curve CSVs.

One polyline per input record, epoch on x, the chosen metric on y, legend
from filenames.  Output is a standalone SVG 1.1 document built from
strings only, so identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

__all__ = ["PlotError", "emit_plot"]

WIDTH, HEIGHT = 800, 500
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 170, 20, 50

PALETTE = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
]


class PlotError(ValueError):
    pass


def _read_series(path, metric: str):
    """Return (epochs, values, diverged_at) for one record CSV."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise PlotError(f"{path}: empty file")
        if "epoch" not in header:
            raise PlotError(f"{path}: no epoch column")
        if metric not in header:
            raise PlotError(f"{path}: no column {metric!r} (has {header})")
        e_col, m_col = header.index("epoch"), header.index(metric)
        epochs, values, diverged = [], [], None
        for row in reader:
            if row and row[0] == "diverged":
                diverged = int(row[1])
                break
            epochs.append(int(row[e_col]))
            values.append(float(row[m_col]))
    pairs = [(e, v) for e, v in zip(epochs, values) if math.isfinite(v)]
    if not pairs:
        raise PlotError(f"{path}: empty record (no finite {metric!r} values)")
    return [p[0] for p in pairs], [p[1] for p in pairs], diverged


def _ticks(lo: float, hi: float, n: int = 5):
    return [lo + i * (hi - lo) / (n - 1) for i in range(n)]


def emit_plot(record_paths, metric: str, out_path) -> None:
    """Write a standalone SVG comparing ``metric`` across the given records."""
    record_paths = [Path(p) for p in record_paths]
    if not record_paths:
        raise PlotError("no input records")
    series = [(p.stem, *_read_series(p, metric)) for p in record_paths]

    x_lo = min(min(xs) for _, xs, _, _ in series)
    x_hi = max(max(xs) for _, xs, _, _ in series)
    y_lo = min(min(ys) for _, _, ys, _ in series)
    y_hi = max(max(ys) for _, _, ys, _ in series)
    if x_hi == x_lo:
        x_hi = x_lo + 1
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0

    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    def sx(x):
        return MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y):
        return MARGIN_T + (1.0 - (y - y_lo) / (y_hi - y_lo)) * plot_h

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>\n',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">\n',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>\n',
    ]
    # axes
    x0, y0 = MARGIN_L, MARGIN_T + plot_h
    parts.append(
        f'<line x1="{x0}" y1="{MARGIN_T}" x2="{x0}" y2="{y0}" stroke="black"/>\n'
    )
    parts.append(
        f'<line x1="{x0}" y1="{y0}" x2="{MARGIN_L + plot_w}" y2="{y0}" stroke="black"/>\n'
    )
    for tx in _ticks(x_lo, x_hi):
        px = sx(tx)
        parts.append(
            f'<line x1="{px:.2f}" y1="{y0}" x2="{px:.2f}" y2="{y0 + 5}" stroke="black"/>\n'
        )
        parts.append(
            f'<text x="{px:.2f}" y="{y0 + 20}" font-size="12" text-anchor="middle">'
            f"{tx:.4g}</text>\n"
        )
    for ty in _ticks(y_lo, y_hi):
        py = sy(ty)
        parts.append(
            f'<line x1="{x0 - 5}" y1="{py:.2f}" x2="{x0}" y2="{py:.2f}" stroke="black"/>\n'
        )
        parts.append(
            f'<text x="{x0 - 8}" y="{py + 4:.2f}" font-size="12" text-anchor="end">'
            f"{ty:.4g}</text>\n"
        )
    parts.append(
        f'<text x="{MARGIN_L + plot_w / 2:.0f}" y="{HEIGHT - 10}" font-size="13" '
        f'text-anchor="middle">epoch</text>\n'
    )
    parts.append(
        f'<text x="18" y="{MARGIN_T + plot_h / 2:.0f}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 18 {MARGIN_T + plot_h / 2:.0f})">{metric}</text>\n'
    )
    # series
    legend_y = MARGIN_T + 14
    for i, (label, xs, ys, diverged) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
            f'points="{pts}"/>\n'
        )
        if diverged is not None:
            mx, my = sx(xs[-1]), sy(ys[-1])
            parts.append(
                f'<circle cx="{mx:.2f}" cy="{my:.2f}" r="5" fill="none" '
                f'stroke="{color}" stroke-width="1.5"/>\n'
            )
            parts.append(
                f'<text x="{mx + 7:.2f}" y="{my - 7:.2f}" font-size="11" '
                f'fill="{color}">diverged@{diverged}</text>\n'
            )
        lx = MARGIN_L + plot_w + 12
        parts.append(
            f'<line x1="{lx}" y1="{legend_y - 4}" x2="{lx + 22}" y2="{legend_y - 4}" '
            f'stroke="{color}" stroke-width="2"/>\n'
        )
        parts.append(
            f'<text x="{lx + 28}" y="{legend_y}" font-size="12">{_esc(label)}</text>\n'
        )
        legend_y += 18
    parts.append("</svg>\n")

    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text("".join(parts), encoding="utf-8")


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
