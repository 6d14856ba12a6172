"""Minimal deterministic SVG line charts for power curves.

One polyline per method, a vertical whisker per point for the confidence
interval.  Hand-rolled so output bytes are reproducible run to run.
"""

from __future__ import annotations

from .harness import PowerCurve

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2")

_WIDTH, _HEIGHT = 640, 420
_ML, _MR, _MT, _MB = 70, 30, 30, 60


def _x_pos(value: float, lo: float, hi: float) -> float:
    span = hi - lo if hi > lo else 1.0
    return _ML + (value - lo) / span * (_WIDTH - _ML - _MR)


def _y_pos(p: float) -> float:
    return _MT + (1.0 - p) * (_HEIGHT - _MT - _MB)


def write_power_svg(curve: PowerCurve, path, title: str = "") -> None:
    xs = [float(v) for v in curve.grid]
    lo, hi = min(xs), max(xs)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
    ]
    # Axes and horizontal gridlines at 0, 0.25, ..., 1.
    for tick in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = _y_pos(tick)
        parts.append(
            f'<line x1="{_ML}" y1="{y:.2f}" x2="{_WIDTH - _MR}" y2="{y:.2f}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_ML - 8}" y="{y + 4:.2f}" font-size="12" text-anchor="end">{tick:g}</text>'
        )
    for x_val in xs:
        x = _x_pos(x_val, lo, hi)
        parts.append(
            f'<text x="{x:.2f}" y="{_HEIGHT - _MB + 18}" font-size="12" '
            f'text-anchor="middle">{x_val:g}</text>'
        )
    parts.append(
        f'<line x1="{_ML}" y1="{_y_pos(0.0):.2f}" x2="{_WIDTH - _MR}" y2="{_y_pos(0.0):.2f}" '
        f'stroke="black" stroke-width="1"/>'
    )
    parts.append(
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_y_pos(0.0):.2f}" stroke="black" stroke-width="1"/>'
    )
    parts.append(
        f'<text x="{(_ML + _WIDTH - _MR) / 2:.0f}" y="{_HEIGHT - 14}" font-size="13" '
        f'text-anchor="middle">{curve.sweep}</text>'
    )
    parts.append(
        f'<text x="16" y="{_HEIGHT / 2:.0f}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 16 {_HEIGHT / 2:.0f})">rejection rate</text>'
    )
    if title:
        parts.append(
            f'<text x="{(_ML + _WIDTH - _MR) / 2:.0f}" y="20" font-size="14" '
            f'text-anchor="middle">{title}</text>'
        )
    for mi, method in enumerate(curve.methods):
        color = _PALETTE[mi % len(_PALETTE)]
        p = curve.p_hat(method)
        ci = curve.ci_half(method)
        points = " ".join(
            f"{_x_pos(x, lo, hi):.2f},{_y_pos(pv):.2f}" for x, pv in zip(xs, p)
        )
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{points}"/>'
        )
        for x_val, pv, half in zip(xs, p, ci):
            x = _x_pos(x_val, lo, hi)
            top = _y_pos(min(1.0, pv + half))
            bot = _y_pos(max(0.0, pv - half))
            parts.append(
                f'<line x1="{x:.2f}" y1="{top:.2f}" x2="{x:.2f}" y2="{bot:.2f}" '
                f'stroke="{color}" stroke-width="1.5"/>'
            )
            parts.append(f'<circle cx="{x:.2f}" cy="{_y_pos(pv):.2f}" r="3" fill="{color}"/>')
        legend_y = _MT + 16 * mi + 6
        parts.append(
            f'<line x1="{_WIDTH - _MR - 120}" y1="{legend_y}" x2="{_WIDTH - _MR - 96}" '
            f'y2="{legend_y}" stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{_WIDTH - _MR - 90}" y="{legend_y + 4}" font-size="12">{method}</text>'
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(parts) + "\n")
