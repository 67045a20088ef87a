"""Minimal deterministic SVG line charts from CSV files.

No plotting dependency: the chart is assembled as text, so identical input
produces identical bytes. One polyline per series, circle markers so a
single-row CSV still shows its points, fixed palette, 5 ticks per axis.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, UsageError

WIDTH, HEIGHT = 640, 400
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 16, 34, 46
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd",
           "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


@dataclass
class PlotSpec:
    csv_path: str
    out_path: str | None = None
    x_column: str | None = None      # default: first column
    series: list[str] = field(default_factory=list)  # default: the rest
    title: str | None = None


def _read_csv(path):
    with open(path, "r", encoding="utf-8", newline="") as f:
        rows = list(csv.reader(f))
    if not rows or len(rows) < 2:
        raise DataError(f"{path}: need a header row and at least one "
                        f"data row")
    header = [h.strip() for h in rows[0]]
    if len(header) < 2:
        raise DataError(f"{path}: need at least two columns")
    cols = {h: [] for h in header}
    for no, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DataError(f"{path}:{no}: expected {len(header)} fields, "
                            f"got {len(row)}")
        for h, cell in zip(header, row):
            try:
                cols[h].append(float(cell))
            except ValueError:
                raise DataError(f"{path}:{no}: non-numeric value "
                                f"{cell!r} in column {h!r}") from None
    return header, {h: np.array(v) for h, v in cols.items()}


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo: float, hi: float, n: int = 5):
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def plot_csv(spec: PlotSpec) -> str:
    """Render the chart; returns the SVG document as a string."""
    header, cols = _read_csv(spec.csv_path)
    x_name = spec.x_column or header[0]
    if x_name not in cols:
        raise UsageError(f"x column {x_name!r} not in CSV "
                         f"(columns: {header})")
    series = list(spec.series) if spec.series else \
        [h for h in header if h != x_name]
    if not series:
        raise UsageError("no series columns to plot")
    for name in series:
        if name not in cols:
            raise UsageError(f"series column {name!r} not in CSV "
                             f"(columns: {header})")

    x = cols[x_name]
    ys = [cols[name] for name in series]
    x_lo, x_hi = float(x.min()), float(x.max())
    y_lo = min(float(y.min()) for y in ys)
    y_hi = max(float(y.max()) for y in ys)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 1.0, x_hi + 1.0
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    iw = WIDTH - MARGIN_L - MARGIN_R
    ih = HEIGHT - MARGIN_T - MARGIN_B

    def sx(v):
        return MARGIN_L + (v - x_lo) / (x_hi - x_lo) * iw

    def sy(v):
        return MARGIN_T + ih - (v - y_lo) / (y_hi - y_lo) * ih

    out = []
    out.append(f'<svg xmlns="http://www.w3.org/2000/svg" '
               f'width="{WIDTH}" height="{HEIGHT}" '
               f'viewBox="0 0 {WIDTH} {HEIGHT}">')
    out.append(f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>')
    title = spec.title or spec.csv_path
    out.append(f'<text x="{WIDTH / 2:.0f}" y="20" text-anchor="middle" '
               f'font-family="sans-serif" font-size="14">{title}</text>')

    ax_col = "#444444"
    out.append(f'<line x1="{MARGIN_L}" y1="{MARGIN_T + ih}" '
               f'x2="{MARGIN_L + iw}" y2="{MARGIN_T + ih}" '
               f'stroke="{ax_col}"/>')
    out.append(f'<line x1="{MARGIN_L}" y1="{MARGIN_T}" '
               f'x2="{MARGIN_L}" y2="{MARGIN_T + ih}" stroke="{ax_col}"/>')
    for tv in _ticks(x_lo, x_hi):
        px = sx(tv)
        out.append(f'<line x1="{_fmt(px)}" y1="{MARGIN_T + ih}" '
                   f'x2="{_fmt(px)}" y2="{MARGIN_T + ih + 5}" '
                   f'stroke="{ax_col}"/>')
        out.append(f'<text x="{_fmt(px)}" y="{MARGIN_T + ih + 18}" '
                   f'text-anchor="middle" font-family="sans-serif" '
                   f'font-size="11">{tv:g}</text>')
    for tv in _ticks(y_lo, y_hi):
        py = sy(tv)
        out.append(f'<line x1="{MARGIN_L - 5}" y1="{_fmt(py)}" '
                   f'x2="{MARGIN_L}" y2="{_fmt(py)}" stroke="{ax_col}"/>')
        out.append(f'<text x="{MARGIN_L - 8}" y="{_fmt(py)}" '
                   f'text-anchor="end" dominant-baseline="middle" '
                   f'font-family="sans-serif" font-size="11">{tv:.4g}</text>')
    out.append(f'<text x="{MARGIN_L + iw / 2:.0f}" y="{HEIGHT - 8}" '
               f'text-anchor="middle" font-family="sans-serif" '
               f'font-size="12">{x_name}</text>')

    order = np.argsort(x, kind="stable")
    for si, name in enumerate(series):
        color = PALETTE[si % len(PALETTE)]
        y = ys[si]
        pts = " ".join(f"{_fmt(sx(x[i]))},{_fmt(sy(y[i]))}" for i in order)
        out.append(f'<polyline points="{pts}" fill="none" '
                   f'stroke="{color}" stroke-width="1.5"/>')
        for i in order:
            out.append(f'<circle cx="{_fmt(sx(x[i]))}" '
                       f'cy="{_fmt(sy(y[i]))}" r="2.5" fill="{color}"/>')
        lx = MARGIN_L + 10 + 150 * si
        out.append(f'<rect x="{lx}" y="{MARGIN_T + 4}" width="10" '
                   f'height="10" fill="{color}"/>')
        out.append(f'<text x="{lx + 14}" y="{MARGIN_T + 13}" '
                   f'font-family="sans-serif" font-size="11">{name}</text>')

    out.append("</svg>")
    doc = "\n".join(out) + "\n"
    if spec.out_path:
        with open(spec.out_path, "w", encoding="utf-8", newline="\n") as f:
            f.write(doc)
    return doc
