"""Minimal static SVG line/bar charts for the command-line reports.

CSV files are the primary artifacts; these figures are a convenience and are
deliberately dependency-free.
"""

from __future__ import annotations

from typing import Mapping, Sequence

__all__ = ["line_chart", "bar_chart"]

_COLORS = ["#d33", "#36c", "#2a2", "#a3a", "#c80", "#088", "#555"]

_W, _H = 640, 420
_ML, _MR, _MT, _MB = 70, 20, 30, 50


def _scale(vals: Sequence[float], lo_px: float, hi_px: float):
    lo, hi = min(vals), max(vals)
    if hi == lo:
        hi = lo + 1.0
    span = hi - lo

    def f(v: float) -> float:
        return lo_px + (v - lo) / span * (hi_px - lo_px)

    return f, lo, hi


def _axes(title: str, xlabel: str, ylabel: str, xlo, xhi, ylo, yhi) -> list[str]:
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
           f'viewBox="0 0 {_W} {_H}">',
           f'<rect width="{_W}" height="{_H}" fill="white"/>',
           f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" '
           f'stroke="black"/>',
           f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" stroke="black"/>',
           f'<text x="{_W / 2:.0f}" y="18" text-anchor="middle" font-size="14">'
           f'{title}</text>',
           f'<text x="{_W / 2:.0f}" y="{_H - 12}" text-anchor="middle" '
           f'font-size="12">{xlabel}</text>',
           f'<text x="16" y="{_H / 2:.0f}" text-anchor="middle" font-size="12" '
           f'transform="rotate(-90 16 {_H / 2:.0f})">{ylabel}</text>',
           f'<text x="{_ML}" y="{_H - _MB + 16}" font-size="10">{xlo:.4g}</text>',
           f'<text x="{_W - _MR}" y="{_H - _MB + 16}" text-anchor="end" '
           f'font-size="10">{xhi:.4g}</text>',
           f'<text x="{_ML - 6}" y="{_H - _MB}" text-anchor="end" font-size="10">'
           f'{ylo:.4g}</text>',
           f'<text x="{_ML - 6}" y="{_MT + 10}" text-anchor="end" font-size="10">'
           f'{yhi:.4g}</text>']
    return out


def line_chart(series: Mapping[str, tuple[Sequence[float], Sequence[float]]],
               title: str, xlabel: str, ylabel: str) -> str:
    """Multi-series line plot; series maps label -> (x values, y values)."""
    all_x = [x for xs, _ in series.values() for x in xs]
    all_y = [y for _, ys in series.values() for y in ys]
    fx, xlo, xhi = _scale(all_x, _ML, _W - _MR)
    fy, ylo, yhi = _scale(all_y, _H - _MB, _MT)
    out = _axes(title, xlabel, ylabel, xlo, xhi, ylo, yhi)
    for idx, (label, (xs, ys)) in enumerate(series.items()):
        color = _COLORS[idx % len(_COLORS)]
        pts = " ".join(f"{fx(x):.2f},{fy(y):.2f}" for x, y in zip(xs, ys))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                   f'stroke-width="2"/>')
        for x, y in zip(xs, ys):
            out.append(f'<circle cx="{fx(x):.2f}" cy="{fy(y):.2f}" r="3" '
                       f'fill="{color}"/>')
        out.append(f'<text x="{_W - _MR - 6}" y="{_MT + 16 + 16 * idx}" '
                   f'text-anchor="end" font-size="12" fill="{color}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out)


def bar_chart(labels: Sequence[str], values: Sequence[float],
              title: str, ylabel: str) -> str:
    """Vertical bar chart with one bar per label."""
    n = len(labels)
    fy, ylo, yhi = _scale([0.0, *values], _H - _MB, _MT)
    out = _axes(title, "", ylabel, 0, n, ylo, yhi)
    span = (_W - _ML - _MR) / max(n, 1)
    for idx, (label, val) in enumerate(zip(labels, values)):
        color = _COLORS[idx % len(_COLORS)]
        x0 = _ML + idx * span + span * 0.15
        y0 = fy(val)
        out.append(f'<rect x="{x0:.2f}" y="{y0:.2f}" width="{span * 0.7:.2f}" '
                   f'height="{(_H - _MB) - y0:.2f}" fill="{color}"/>')
        out.append(f'<text x="{x0 + span * 0.35:.2f}" y="{_H - _MB + 14}" '
                   f'text-anchor="middle" font-size="10">{label}</text>')
        out.append(f'<text x="{x0 + span * 0.35:.2f}" y="{y0 - 4:.2f}" '
                   f'text-anchor="middle" font-size="10">{val:.4g}</text>')
    out.append("</svg>")
    return "\n".join(out)
