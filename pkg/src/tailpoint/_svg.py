"""Minimal standalone SVG line and scatter charts."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

_W, _H, _PAD = 640, 400, 50
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")


def _scale(values, lo_px, hi_px):
    finite = [v for v in values if v is not None and math.isfinite(v)]
    lo, hi = (min(finite), max(finite)) if finite else (0.0, 1.0)
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    return lambda v: lo_px + (v - lo) / (hi - lo) * (hi_px - lo_px), lo, hi


def _frame(title, xlabel, xlo, xhi, ylo, yhi):
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" font-family="sans-serif" font-size="11">',
        f'<rect x="{_PAD}" y="{_PAD}" width="{_W - 2 * _PAD}" height="{_H - 2 * _PAD}" fill="none" stroke="#444"/>',
        f'<text x="{_W / 2}" y="{_PAD / 2}" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<text x="{_W / 2}" y="{_H - 10}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="{_PAD}" y="{_H - _PAD + 15}" text-anchor="middle">{xlo:.3g}</text>',
        f'<text x="{_W - _PAD}" y="{_H - _PAD + 15}" text-anchor="middle">{xhi:.3g}</text>',
        f'<text x="{_PAD - 5}" y="{_H - _PAD}" text-anchor="end">{ylo:.3g}</text>',
        f'<text x="{_PAD - 5}" y="{_PAD + 4}" text-anchor="end">{yhi:.3g}</text>',
    ]


def _legend(names):
    out = []
    for i, name in enumerate(names):
        y = _PAD + 15 + 14 * i
        color = _COLORS[i % len(_COLORS)]
        out.append(f'<rect x="{_W - _PAD - 110}" y="{y - 8}" width="10" height="10" fill="{color}"/>')
        out.append(f'<text x="{_W - _PAD - 95}" y="{y + 1}">{escape(name)}</text>')
    return out


def line_chart(x, series: dict, title: str = "", xlabel: str = "") -> str:
    """Polylines of each series against ``x``; None values break the line."""
    sx, xlo, xhi = _scale(x, _PAD, _W - _PAD)
    all_y = [v for ys in series.values() for v in ys]
    sy, ylo, yhi = _scale(all_y, _H - _PAD, _PAD)
    parts = _frame(title, xlabel, xlo, xhi, ylo, yhi)
    for i, (name, ys) in enumerate(series.items()):
        color = _COLORS[i % len(_COLORS)]
        run = []
        for xv, yv in list(zip(x, ys)) + [(None, None)]:
            if yv is None or xv is None or not math.isfinite(yv):
                if len(run) > 1:
                    pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in run)
                    parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
                run = []
            else:
                run.append((sx(xv), sy(yv)))
    parts += _legend(series) + ["</svg>"]
    return "\n".join(parts) + "\n"


def scatter_chart(points, title: str = "", xlabel: str = "") -> str:
    """``points`` is a list of ``(label, x, y)``; rows with a None coordinate are skipped."""
    pts = [p for p in points if p[1] is not None and p[2] is not None]
    sx, xlo, xhi = _scale([p[1] for p in pts], _PAD, _W - _PAD)
    sy, ylo, yhi = _scale([p[2] for p in pts], _H - _PAD, _PAD)
    parts = _frame(title, xlabel, xlo, xhi, ylo, yhi)
    for label, xv, yv in pts:
        cx, cy = sx(xv), sy(yv)
        parts.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="3" fill="{_COLORS[0]}"/>')
        parts.append(f'<text x="{cx + 5:.2f}" y="{cy - 4:.2f}" font-size="9">{escape(label)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
