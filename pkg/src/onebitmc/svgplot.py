"""Minimal SVG scatter plots on log-log axes.

A convenience for eyeballing excess-vs-n decay; axes, points, fitted lines
and a slope label, nothing more.  The emitted markup is built from formatted
strings only, so identical inputs give identical files.
"""

import math

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

_WIDTH, _HEIGHT = 640, 440
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 70, 20, 30, 50


def _ticks(lo: float, hi: float):
    """Decade ticks covering [lo, hi] in log10 space."""
    first = math.floor(lo)
    last = math.ceil(hi)
    return [t for t in range(first, last + 1) if lo - 0.5 <= t <= hi + 0.5]


def loglog_plot(series, title: str) -> str:
    """Render scatter series with fitted lines to an SVG string.

    series is a list of dicts with keys: label, points (list of (x, y) with
    x, y > 0), slope, intercept (the fit in log-log space, may be None).
    """
    xs = [math.log10(x) for s in series for x, _ in s["points"]]
    ys = [math.log10(y) for s in series for _, y in s["points"]]
    if not xs:
        raise ValueError("nothing to plot")
    x_lo, x_hi = min(xs) - 0.1, max(xs) + 0.1
    y_lo, y_hi = min(ys) - 0.2, max(ys) + 0.2

    plot_w = _WIDTH - _MARGIN_L - _MARGIN_R
    plot_h = _HEIGHT - _MARGIN_T - _MARGIN_B

    def px(lx):
        return _MARGIN_L + (lx - x_lo) / (x_hi - x_lo) * plot_w

    def py(ly):
        return _MARGIN_T + (y_hi - ly) / (y_hi - y_lo) * plot_h

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
             f'height="{_HEIGHT}" font-family="monospace" font-size="12">',
             f'<text x="{_WIDTH / 2:.1f}" y="18" text-anchor="middle">{title}</text>',
             f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{plot_w}" '
             f'height="{plot_h}" fill="none" stroke="black"/>']

    for t in _ticks(x_lo, x_hi):
        x = px(t)
        parts.append(f'<line x1="{x:.1f}" y1="{_MARGIN_T + plot_h}" x2="{x:.1f}" '
                     f'y2="{_MARGIN_T + plot_h + 5}" stroke="black"/>')
        parts.append(f'<text x="{x:.1f}" y="{_MARGIN_T + plot_h + 20}" '
                     f'text-anchor="middle">1e{t}</text>')
    for t in _ticks(y_lo, y_hi):
        y = py(t)
        parts.append(f'<line x1="{_MARGIN_L - 5}" y1="{y:.1f}" x2="{_MARGIN_L}" '
                     f'y2="{y:.1f}" stroke="black"/>')
        parts.append(f'<text x="{_MARGIN_L - 8}" y="{y + 4:.1f}" '
                     f'text-anchor="end">1e{t}</text>')
    parts.append(f'<text x="{_MARGIN_L + plot_w / 2:.1f}" y="{_HEIGHT - 12}" '
                 f'text-anchor="middle">n</text>')

    for i, s in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        for x, y in s["points"]:
            parts.append(f'<circle cx="{px(math.log10(x)):.1f}" '
                         f'cy="{py(math.log10(y)):.1f}" r="3" fill="{color}"/>')
        label = s["label"]
        if s.get("slope") is not None:
            # fit lives in natural-log space; convert to log10 for drawing
            ln10 = math.log(10)
            ly_left = (s["slope"] * (x_lo * ln10) + s["intercept"]) / ln10
            ly_right = (s["slope"] * (x_hi * ln10) + s["intercept"]) / ln10
            parts.append(f'<line x1="{px(x_lo):.1f}" y1="{py(ly_left):.1f}" '
                         f'x2="{px(x_hi):.1f}" y2="{py(ly_right):.1f}" '
                         f'stroke="{color}" stroke-dasharray="4 3"/>')
            label += f" slope={s['slope']:.3f}"
        parts.append(f'<text x="{_MARGIN_L + 8}" y="{_MARGIN_T + 16 + 14 * i}" '
                     f'fill="{color}">{label}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
