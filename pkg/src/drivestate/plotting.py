"""Hand-rolled SVG timeline: estimate strip, road-condition strip, active-set strip.

Plain SVG text keeps the output diff-able and structurally testable without a
plotting backend.
"""
from __future__ import annotations

from pathlib import Path
from typing import List, Sequence, Tuple
from xml.sax.saxutils import escape

from .estimator import RecordRow

_MARGIN_LEFT = 140.0
_PLOT_WIDTH = 800.0
_STRIP_HEIGHT = 46.0
_STRIP_GAP = 34.0
_ROW_HEIGHT = 14.0

_PALETTE = (
    "#4c78a8", "#f58518", "#54a24b", "#e45756", "#72b7b2",
    "#eeca3b", "#b279a2", "#9d755d", "#bab0ac", "#ff9da6",
)


def _segments(values: Sequence[str]) -> List[Tuple[str, int, int]]:
    out: List[Tuple[str, int, int]] = []
    start = 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i] != values[start]:
            out.append((values[start], start, i))
            start = i
    return out


def _color(label: str, order: Sequence[str]) -> str:
    return _PALETTE[order.index(label) % len(_PALETTE)]


def _strip(
    group_id: str,
    title: str,
    values: Sequence[str],
    xs: Sequence[float],
    y: float,
    order: Sequence[str],
) -> List[str]:
    parts = [f'<g id="{group_id}">']
    parts.append(
        f'<text x="4" y="{y + _STRIP_HEIGHT / 2:.1f}" font-size="12" '
        f'dominant-baseline="middle">{escape(title)}</text>'
    )
    for label, i, j in _segments(values):
        x0, x1 = xs[i], xs[j] if j < len(xs) else _MARGIN_LEFT + _PLOT_WIDTH
        parts.append(
            f'<rect x="{x0:.2f}" y="{y:.1f}" width="{max(x1 - x0, 0.5):.2f}" '
            f'height="{_STRIP_HEIGHT:.1f}" fill="{_color(label, order)}">'
            f"<title>{escape(label)}</title></rect>"
        )
    parts.append("</g>")
    return parts


def render_timeline_svg(records: Sequence[RecordRow]) -> str:
    """Three strips sharing one time axis, as in the estimation timeline figure."""
    if not records:
        raise ValueError("no records to plot")
    t0 = records[0].timestamp
    t1 = records[-1].timestamp
    span = max(t1 - t0, 1e-9)
    xs = [_MARGIN_LEFT + _PLOT_WIDTH * (r.timestamp - t0) / span for r in records]
    if len(records) == 1:
        xs = [_MARGIN_LEFT]

    estimates = [r.estimate for r in records]
    rcs = [r.rcs.value for r in records]
    active_sets = [
        "+".join(sorted(k for k, v in r.scores.items() if v is not None))
        for r in records
    ]
    est_order = sorted(set(estimates))
    rcs_order = sorted(set(rcs))
    set_order = sorted(set(active_sets))

    height = 3 * (_STRIP_HEIGHT + _STRIP_GAP) + 40
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_MARGIN_LEFT + _PLOT_WIDTH + 20:.0f}" '
        f'height="{height:.0f}" font-family="sans-serif">',
    ]
    y = 20.0
    parts += _strip("estimate-strip", "Estimated metastate", estimates, xs, y, est_order)
    y += _STRIP_HEIGHT + _STRIP_GAP
    parts += _strip("rc-strip", "Road condition", rcs, xs, y, rcs_order)
    y += _STRIP_HEIGHT + _STRIP_GAP
    parts += _strip("active-set-strip", "Active metastates", active_sets, xs, y, set_order)
    parts.append(
        f'<text x="{_MARGIN_LEFT:.0f}" y="{height - 6:.0f}" font-size="11">t = {t0:.1f} s</text>'
    )
    parts.append(
        f'<text x="{_MARGIN_LEFT + _PLOT_WIDTH - 60:.0f}" y="{height - 6:.0f}" '
        f'font-size="11">t = {t1:.1f} s</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts)


def write_timeline_svg(path: Path, records: Sequence[RecordRow]) -> None:
    Path(path).write_text(render_timeline_svg(records))
