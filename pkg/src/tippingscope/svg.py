"""Minimal standalone SVG line plots and categorical heatmaps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape

__all__ = ["Series", "Heatmap", "emit_svg", "render_svg"]

WIDTH, HEIGHT = 640, 440
MARGIN = dict(left=70, right=150, top=40, bottom=55)
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22"]


@dataclass
class Series:
    x: Sequence[float]
    y: Sequence[float]
    label: str = ""
    markers: bool = False  # scatter instead of a polyline


@dataclass
class Heatmap:
    x_edges: Sequence[float]
    y_edges: Sequence[float]
    categories: List[List[str]]  # categories[i][j] for x cell i, y cell j
    colors: Dict[str, str] = field(default_factory=dict)


def _fmt(v: float) -> str:
    return format(float(v), ".6g")


def _nice_ticks(lo, hi, n=5):
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((s * mag for s in (1, 2, 2.5, 5, 10) if s * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    ticks = []
    k = 0
    while start + k * step <= hi + 1e-9 * step:
        ticks.append(start + k * step)
        k += 1
    return ticks


def _bounds(values, pad=0.0):
    vals = [v for v in values if math.isfinite(v)]
    if not vals:
        return 0.0, 1.0
    lo, hi = min(vals), max(vals)
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    span = hi - lo
    return lo - pad * span, hi + pad * span


def render_svg(series: Sequence[Series] = (), heatmap: Optional[Heatmap] = None,
               title: str = "", xlabel: str = "x", ylabel: str = "y",
               xlim: Optional[Tuple[float, float]] = None,
               ylim: Optional[Tuple[float, float]] = None) -> str:
    """SVG document text for line series and/or a categorical heatmap."""
    for s in series:
        if len(s.x) != len(s.y):
            raise ValueError(f"series {s.label!r}: x and y lengths differ")
        if not all(math.isfinite(v) for v in list(s.x) + list(s.y)):
            raise ValueError(f"series {s.label!r} contains non-finite values")

    xs = [v for s in series for v in s.x]
    ys = [v for s in series for v in s.y]
    if heatmap is not None:
        xs += [heatmap.x_edges[0], heatmap.x_edges[-1]]
        ys += [heatmap.y_edges[0], heatmap.y_edges[-1]]
        pad = 0.0
    else:
        pad = 0.04
    x0, x1 = xlim if xlim else _bounds(xs, pad)
    y0, y1 = ylim if ylim else _bounds(ys, pad)

    L, R, T, B = MARGIN["left"], MARGIN["right"], MARGIN["top"], MARGIN["bottom"]
    pw, ph = WIDTH - L - R, HEIGHT - T - B

    def px(x):
        return L + (x - x0) / (x1 - x0) * pw

    def py(y):
        return T + ph - (y - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        "<style>.axis{stroke:#000;stroke-width:1}.tick{stroke:#000}"
        ".grid{stroke:#ddd;stroke-width:0.5}"
        + "".join(f".series-{i}{{fill:none;stroke:{PALETTE[i % len(PALETTE)]};stroke-width:1.5}}"
                  f".marker-{i}{{fill:{PALETTE[i % len(PALETTE)]}}}"
                  for i in range(len(series)))
        + "</style>",
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#fff"/>',
    ]
    if title:
        out.append(f'<text x="{L + pw / 2}" y="{T - 15}" text-anchor="middle" '
                   f'font-size="14">{escape(title)}</text>')

    legend = []
    if heatmap is not None:
        cats = sorted({c for row in heatmap.categories for c in row})
        colors = {c: heatmap.colors.get(c, PALETTE[k % len(PALETTE)]) for k, c in enumerate(cats)}
        xe, ye = heatmap.x_edges, heatmap.y_edges
        out.append('<g class="heatmap">')
        for i, row in enumerate(heatmap.categories):
            for j, c in enumerate(row):
                xa, xb = px(xe[i]), px(xe[i + 1])
                ya, yb = py(ye[j + 1]), py(ye[j])
                out.append(f'<rect x="{_fmt(xa)}" y="{_fmt(ya)}" width="{_fmt(xb - xa)}" '
                           f'height="{_fmt(yb - ya)}" fill="{colors[c]}"/>')
        out.append("</g>")
        legend += [(c, f'fill="{colors[c]}"', "rect") for c in cats]

    # axes and ticks
    out.append(f'<line class="axis" x1="{L}" y1="{T + ph}" x2="{L + pw}" y2="{T + ph}"/>')
    out.append(f'<line class="axis" x1="{L}" y1="{T}" x2="{L}" y2="{T + ph}"/>')
    for t in _nice_ticks(x0, x1):
        X = _fmt(px(t))
        out.append(f'<line class="tick" x1="{X}" y1="{T + ph}" x2="{X}" y2="{T + ph + 5}"/>')
        out.append(f'<text x="{X}" y="{T + ph + 18}" text-anchor="middle">{_fmt(t)}</text>')
    for t in _nice_ticks(y0, y1):
        Y = _fmt(py(t))
        out.append(f'<line class="tick" x1="{L - 5}" y1="{Y}" x2="{L}" y2="{Y}"/>')
        out.append(f'<text x="{L - 8}" y="{Y}" text-anchor="end" dominant-baseline="middle">'
                   f'{_fmt(t)}</text>')
    out.append(f'<text x="{L + pw / 2}" y="{HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="18" y="{T + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 18 {T + ph / 2})">{escape(ylabel)}</text>')

    out.append(f'<clipPath id="plot"><rect x="{L}" y="{T}" width="{pw}" height="{ph}"/></clipPath>')
    for i, s in enumerate(series):
        if not len(s.x):
            continue
        pts = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(s.x, s.y))
        if s.markers:
            out.append(f'<g class="marker-{i}" clip-path="url(#plot)">')
            out += [f'<circle cx="{_fmt(px(a))}" cy="{_fmt(py(b))}" r="2"/>' for a, b in zip(s.x, s.y)]
            out.append("</g>")
        else:
            out.append(f'<polyline class="series-{i}" clip-path="url(#plot)" points="{pts}"/>')
        if s.label:
            legend.append((s.label, f'class="{"marker" if s.markers else "series"}-{i}"',
                           "circle" if s.markers else "line"))

    lx, ly = L + pw + 12, T + 8
    for k, (label, style, kind) in enumerate(legend):
        y = ly + 18 * k
        if kind == "rect":
            out.append(f'<rect x="{lx}" y="{y - 6}" width="12" height="12" {style}/>')
        elif kind == "circle":
            out.append(f'<circle cx="{lx + 6}" cy="{y}" r="3" {style}/>')
        else:
            out.append(f'<line x1="{lx}" y1="{y}" x2="{lx + 14}" y2="{y}" {style}/>')
        out.append(f'<text x="{lx + 20}" y="{y}" dominant-baseline="middle">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(path: str, series: Sequence[Series] = (), heatmap: Optional[Heatmap] = None,
             **kw) -> str:
    """Render and write an SVG file; returns the path."""
    text = render_svg(series, heatmap, **kw)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return path
