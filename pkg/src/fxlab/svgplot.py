"""Minimal deterministic SVG charts.

Matplotlib stamps creation dates and generated ids into its SVG output,
which breaks byte-identical reruns; these hand-rolled writers emit exactly
the same bytes for the same inputs.
"""

from __future__ import annotations

WIDTH, HEIGHT = 900, 480
MARGIN = 55
LINE_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _scale(values, lo, hi, out_lo, out_hi):
    span = hi - lo
    if span == 0:
        span = 1.0
    return [out_lo + (v - lo) / span * (out_hi - out_lo) for v in values]


def color_gradient(t: float) -> str:
    """Blue (0) to red (1) linear blend."""
    t = min(max(t, 0.0), 1.0)
    r = int(round(255 * t))
    b = int(round(255 * (1.0 - t)))
    return f"#{r:02x}00{b:02x}"


def _axes(x_label: str, y_label: str, y_lo: float, y_hi: float) -> list[str]:
    parts = [
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<text x="{WIDTH // 2}" y="{HEIGHT - 12}" font-size="13" text-anchor="middle">{x_label}</text>',
        f'<text x="16" y="{HEIGHT // 2}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {HEIGHT // 2})">{y_label}</text>',
        f'<text x="{MARGIN - 6}" y="{HEIGHT - MARGIN + 4}" font-size="11" text-anchor="end">{_fmt(y_lo)}</text>',
        f'<text x="{MARGIN - 6}" y="{MARGIN + 4}" font-size="11" text-anchor="end">{_fmt(y_hi)}</text>',
    ]
    return parts


def line_chart(
    series: dict[str, list[float]],
    title: str,
    y_label: str = "cumulative return (%)",
    markers: list[tuple[int, str]] | None = None,
) -> str:
    """Polyline chart over bar index; markers are (index, label) red dots on
    the first series listed."""
    n = max(len(v) for v in series.values())
    all_values = [v for vs in series.values() for v in vs]
    y_lo, y_hi = min(all_values), max(all_values)
    if y_lo == y_hi:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        *_axes("bar", y_label, y_lo, y_hi),
        f'<text x="{WIDTH // 2}" y="24" font-size="15" text-anchor="middle">{title}</text>',
    ]
    first_name = next(iter(series))
    for ci, (name, values) in enumerate(series.items()):
        xs = _scale(range(len(values)), 0, max(n - 1, 1), MARGIN, WIDTH - MARGIN)
        ys = _scale(values, y_lo, y_hi, HEIGHT - MARGIN, MARGIN)
        points = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in zip(xs, ys))
        color = LINE_COLORS[ci % len(LINE_COLORS)]
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{points}"/>')
        parts.append(
            f'<text x="{WIDTH - MARGIN + 4}" y="{MARGIN + 16 * ci + 10}" font-size="11" fill="{color}">{name}</text>'
        )
    for idx, label_text in markers or []:
        values = series[first_name]
        x = _scale([idx], 0, max(n - 1, 1), MARGIN, WIDTH - MARGIN)[0]
        y = _scale([values[idx]], y_lo, y_hi, HEIGHT - MARGIN, MARGIN)[0]
        parts.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="5" fill="red"/>')
        parts.append(f'<text x="{_fmt(x + 7)}" y="{_fmt(y - 7)}" font-size="11" fill="red">{label_text}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def scatter_chart(xs: list[float], ys: list[float], colors01: list[float], title: str) -> str:
    """Scatter with a blue-to-red gradient per point (0 -> blue, 1 -> red)."""
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_lo == x_hi:
        x_lo, x_hi = x_lo - 1.0, x_hi + 1.0
    if y_lo == y_hi:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
    sx = _scale(xs, x_lo, x_hi, MARGIN, WIDTH - MARGIN)
    sy = _scale(ys, y_lo, y_hi, HEIGHT - MARGIN, MARGIN)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH // 2}" y="24" font-size="15" text-anchor="middle">{title}</text>',
    ]
    for x, y, t in zip(sx, sy, colors01):
        parts.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="2.5" fill="{color_gradient(t)}" fill-opacity="0.8"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
