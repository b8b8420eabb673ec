"""CSV tables and minimal SVG line plots."""

from __future__ import annotations

import math
import os
from xml.sax.saxutils import escape

_WIDTH, _HEIGHT, _PAD = 640, 420, 56
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


def fmt(value) -> str:
    """Cell text: numbers with 12 significant digits, everything else verbatim."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return "%.12g" % value
    return "" if value is None else str(value)


def write_csv(path, header, rows, comment: str) -> str:
    """Write a comment line, the header, then one line per row."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(f"# {comment}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")
    return path


def _ticks(lo, hi, n=5):
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def write_svg(path, series, title="", xlabel="", ylabel="") -> str:
    """Line plot of ``series``: a list of ``(label, xs, ys)``; non-finite points break lines."""
    pts = [(x, y) for _, xs, ys in series for x, y in zip(xs, ys) if math.isfinite(x) and math.isfinite(y)]
    if not pts:
        pts = [(0.0, 0.0), (1.0, 1.0)]
    x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
    y0, y1 = min(p[1] for p in pts), max(p[1] for p in pts)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    w, h = _WIDTH - 2 * _PAD, _HEIGHT - 2 * _PAD

    def sx(x):
        return _PAD + (x - x0) / (x1 - x0) * w

    def sy(y):
        return _HEIGHT - _PAD - (y - y0) / (y1 - y0) * h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<rect x="{_PAD}" y="{_PAD}" width="{w}" height="{h}" fill="none" stroke="black"/>',
        f'<text x="{_WIDTH / 2}" y="{_PAD / 2}" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<text x="{_WIDTH / 2}" y="{_HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="14" y="{_HEIGHT / 2}" text-anchor="middle" transform="rotate(-90 14 {_HEIGHT / 2})">{escape(ylabel)}</text>',
    ]
    for t in _ticks(x0, x1):
        out.append(f'<text x="{sx(t):.1f}" y="{_HEIGHT - _PAD + 14}" text-anchor="middle">{fmt(round(t, 4))}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<text x="{_PAD - 4}" y="{sy(t) + 4:.1f}" text-anchor="end">{fmt(round(t, 4))}</text>')
    for k, (label, xs, ys) in enumerate(series):
        color = _COLORS[k % len(_COLORS)]
        segment = []
        segments = [segment]
        for x, y in zip(xs, ys):
            if math.isfinite(x) and math.isfinite(y):
                segment.append(f"{sx(x):.2f},{sy(y):.2f}")
            elif segment:
                segment = []
                segments.append(segment)
        for seg in segments:
            if len(seg) > 1:
                out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{" ".join(seg)}"/>')
            elif seg:
                cx, cy = seg[0].split(",")
                out.append(f'<circle cx="{cx}" cy="{cy}" r="2" fill="{color}"/>')
        ly = _PAD + 14 + 14 * k
        out.append(f'<line x1="{_PAD + w - 110}" y1="{ly - 4}" x2="{_PAD + w - 92}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{_PAD + w - 88}" y="{ly}">{escape(str(label))}</text>')
    out.append("</svg>")
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")
    return path
