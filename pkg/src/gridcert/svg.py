"""Minimal deterministic SVG line plots.

Output depends only on the input numbers: fixed ``viewBox="0 0 800 600"``,
one ``<polyline>`` per series, tick marks at 1-2-5 round numbers.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape, quoteattr

import numpy as np

WIDTH, HEIGHT = 800, 600
LEFT, RIGHT, TOP, BOTTOM = 80, 170, 40, 70
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
           "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22")
LEGEND_MAX = 10

AXES = {
    "boundary": ("P (p.u.)", "Q (p.u.)"),
    "sweep": ("P (p.u.)", "Q (p.u.)"),
    "pv": ("P (p.u.)", "|v| (p.u.)"),
}


def nice_ticks(lo, hi, target=6):
    """Round-number ticks covering ``[lo, hi]`` with a 1, 2 or 5 x 10^k spacing."""
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("axis range must be finite")
    if hi <= lo:
        pad = abs(lo) * 0.1 or 1.0
        lo, hi = lo - pad, hi + pad
    raw = (hi - lo) / max(target - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 5, 10) if m * mag >= raw * (1 - 1e-12))
    start = math.floor(lo / step + 1e-9) * step
    stop = math.ceil(hi / step - 1e-9) * step
    count = int(round((stop - start) / step))
    ticks = [start + k * step for k in range(count + 1)]
    # collapse -0.0 and float noise so labels stay stable
    return [0.0 if abs(t) < step * 1e-9 else round(t, 12) for t in ticks], step


def _label(value, step):
    decimals = max(0, -int(math.floor(math.log10(step)))) if step < 1 else 0
    return f"{value:.{decimals}f}"


def render_svg(series, kind="boundary", title=None) -> str:
    """Render ``series`` (a list of ``(label, xs, ys)``) as an SVG document."""
    if kind not in AXES:
        raise ValueError(f"unknown plot kind {kind!r}; expected one of {sorted(AXES)}")
    cleaned = []
    for label, xs, ys in series:
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        keep = np.isfinite(xs) & np.isfinite(ys)
        if keep.any():
            cleaned.append((str(label), xs[keep], ys[keep]))
    if not cleaned:
        raise ValueError("nothing to plot: all series are empty")

    all_x = np.concatenate([c[1] for c in cleaned])
    all_y = np.concatenate([c[2] for c in cleaned])
    xticks, xstep = nice_ticks(float(all_x.min()), float(all_x.max()))
    yticks, ystep = nice_ticks(float(all_y.min()), float(all_y.max()))
    x0, x1, y0, y1 = xticks[0], xticks[-1], yticks[0], yticks[-1]
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(x):
        return LEFT + (x - x0) / (x1 - x0) * pw

    def py(y):
        return TOP + ph - (y - y0) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
        f'width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in xticks:
        x = px(t)
        out.append(f'<line x1="{x:.2f}" y1="{TOP + ph}" x2="{x:.2f}" y2="{TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{TOP + ph + 20}" text-anchor="middle">{_label(t, xstep)}</text>')
    for t in yticks:
        y = py(t)
        out.append(f'<line x1="{LEFT - 5}" y1="{y:.2f}" x2="{LEFT}" y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 8}" y="{y + 4:.2f}" text-anchor="end">{_label(t, ystep)}</text>')
    xlabel, ylabel = AXES[kind]
    out.append(f'<text x="{LEFT + pw / 2:.2f}" y="{HEIGHT - 20}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="20" y="{TOP + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 20 {TOP + ph / 2:.2f})">{escape(ylabel)}</text>')
    if title:
        out.append(f'<text x="{LEFT + pw / 2:.2f}" y="{TOP - 14}" text-anchor="middle">{escape(title)}</text>')

    for k, (label, xs, ys) in enumerate(cleaned):
        color = PALETTE[k % len(PALETTE)]
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}">'
                   f'<title>{escape(label)}</title></polyline>')
    if len(cleaned) <= LEGEND_MAX:
        for k, (label, _, _) in enumerate(cleaned):
            y = TOP + 10 + 18 * k
            color = PALETTE[k % len(PALETTE)]
            lx = WIDTH - RIGHT + 15
            out.append(f'<line x1="{lx}" y1="{y}" x2="{lx + 20}" y2="{y}" stroke="{color}" stroke-width="2"/>')
            out.append(f'<text x="{lx + 26}" y="{y + 4}" data-series={quoteattr(label)}>{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
