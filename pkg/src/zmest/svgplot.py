"""Tiny deterministic SVG line-plot writer (linear or log axes).

Output depends only on the data, so files are byte-stable across runs; the
first line after the XML header is a version comment.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

from . import __version__

WIDTH, HEIGHT = 640, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 150, 40, 50
COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


@dataclass
class Series:
    label: str
    xs: list[float]
    ys: list[float]


@dataclass
class Plot:
    title: str
    xlabel: str
    ylabel: str
    xlog: bool = False
    ylog: bool = False
    series: list[Series] = field(default_factory=list)
    hlines: list[tuple[str, float]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def add(self, label, xs, ys):
        self.series.append(Series(label, list(map(float, xs)), list(map(float, ys))))

    def render(self) -> str:
        return _render(self)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.render(), encoding="utf-8")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick_label(v: float) -> str:
    return f"{v:.3g}"


def _usable(v: float, log: bool) -> bool:
    return math.isfinite(v) and (v > 0 or not log)


def _ticks(lo: float, hi: float, log: bool) -> list[float]:
    if log:
        return [float(e) for e in range(math.floor(lo), math.ceil(hi) + 1)]
    span = hi - lo
    step = 10 ** math.floor(math.log10(span / 4)) if span > 0 else 1.0
    for mult in (1, 2, 5, 10):
        if span / (step * mult) <= 6:
            step *= mult
            break
    start = math.ceil(lo / step) * step
    n = int(math.floor((hi - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(max(n, 0))]


def _render(plot: Plot) -> str:
    tx = (lambda v: math.log10(v)) if plot.xlog else (lambda v: v)
    ty = (lambda v: math.log10(v)) if plot.ylog else (lambda v: v)
    pts_x, pts_y = [], []
    for s in plot.series:
        for x, y in zip(s.xs, s.ys):
            if _usable(x, plot.xlog) and _usable(y, plot.ylog):
                pts_x.append(tx(x))
                pts_y.append(ty(y))
    for _, y in plot.hlines:
        if _usable(y, plot.ylog):
            pts_y.append(ty(y))
    if not pts_x:
        pts_x = [0.0, 1.0]
    if not pts_y:
        pts_y = [0.0, 1.0]
    x0, x1 = min(pts_x), max(pts_x)
    y0, y1 = min(pts_y), max(pts_y)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = HEIGHT - MARGIN_T - MARGIN_B

    def px(v):
        return MARGIN_L + (v - x0) / (x1 - x0) * pw

    def py(v):
        return MARGIN_T + (y1 - v) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f"<!-- zmest {__version__} -->",
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="22" text-anchor="middle" font-size="14">{escape(plot.title)}</text>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1, plot.xlog):
        if x0 <= t <= x1:
            label = _tick_label(10**t if plot.xlog else t)
            out.append(f'<line x1="{_fmt(px(t))}" y1="{MARGIN_T + ph}" x2="{_fmt(px(t))}" y2="{MARGIN_T + ph + 5}" stroke="black"/>')
            out.append(f'<text x="{_fmt(px(t))}" y="{MARGIN_T + ph + 18}" text-anchor="middle">{label}</text>')
    for t in _ticks(y0, y1, plot.ylog):
        if y0 <= t <= y1:
            label = _tick_label(10**t if plot.ylog else t)
            out.append(f'<line x1="{MARGIN_L - 5}" y1="{_fmt(py(t))}" x2="{MARGIN_L}" y2="{_fmt(py(t))}" stroke="black"/>')
            out.append(f'<text x="{MARGIN_L - 8}" y="{_fmt(py(t) + 4)}" text-anchor="end">{label}</text>')
    out.append(f'<text x="{MARGIN_L + pw / 2:.0f}" y="{HEIGHT - 10}" text-anchor="middle">{escape(plot.xlabel)}</text>')
    out.append(
        f'<text x="16" y="{MARGIN_T + ph / 2:.0f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {MARGIN_T + ph / 2:.0f})">{escape(plot.ylabel)}</text>'
    )
    legend_y = MARGIN_T + 10
    for label, y in plot.hlines:
        if not _usable(y, plot.ylog):
            continue
        out.append(
            f'<line x1="{MARGIN_L}" y1="{_fmt(py(ty(y)))}" x2="{MARGIN_L + pw}" y2="{_fmt(py(ty(y)))}" '
            'stroke="gray" stroke-dasharray="5,4"/>'
        )
        out.append(f'<text x="{MARGIN_L + pw + 8}" y="{legend_y}" fill="gray">{escape(label)}</text>')
        legend_y += 16
    for i, s in enumerate(plot.series):
        color = COLORS[i % len(COLORS)]
        coords = [
            f"{_fmt(px(tx(x)))},{_fmt(py(ty(y)))}"
            for x, y in zip(s.xs, s.ys)
            if _usable(x, plot.xlog) and _usable(y, plot.ylog)
        ]
        if coords:
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{" ".join(coords)}"/>')
        out.append(f'<text x="{MARGIN_L + pw + 8}" y="{legend_y}" fill="{color}">{escape(s.label)}</text>')
        legend_y += 16
    for note in plot.notes:
        out.append(f'<text x="{MARGIN_L + pw + 8}" y="{legend_y}" font-size="10">{escape(note)}</text>')
        legend_y += 14
    out.append("</svg>")
    return "\n".join(out) + "\n"
