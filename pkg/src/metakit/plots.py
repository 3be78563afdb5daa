"""Deterministic SVG rendering of forest and funnel plots.

SVG is assembled from strings with fixed-precision coordinates so identical
inputs produce byte-identical files, which makes golden-file testing and
reproducible reports possible. No plotting library is involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from scipy.stats import norm

from .effects import RATIO_MEASURES, EffectEstimate
from .errors import MetakitError
from .heterogeneity import HeterogeneityReport
from .pooling import PooledResult
from .publication_bias import FunnelPoint

FOREST_WIDTH = 800
ROW_HEIGHT = 24
FOREST_EXTRA = 60

_PLOT_X0 = 210.0
_PLOT_X1 = 610.0


def format_p(p: float) -> str:
    """Display form of a p-value; tiny values print as a bound, never 0."""
    if p < 0.001:
        return "<0.001"
    return f"{p:.3f}"


@dataclass(frozen=True)
class ForestRow:
    label: str
    value: float
    ci_low: float
    ci_high: float
    weight: float


@dataclass(frozen=True)
class ForestSpec:
    """Everything needed to draw a forest plot.

    Values are on the analysis scale (log scale for ratio measures, with
    axis_scale "log" and the no-effect line at a displayed 1). Weights are
    normalized study weights summing to 1.
    """

    rows: tuple[ForestRow, ...]
    summary_estimate: float
    summary_ci_low: float
    summary_ci_high: float
    null_line: float
    axis_scale: str
    ci_level: float = 0.95
    heterogeneity: HeterogeneityReport | None = None

    def __post_init__(self):
        if not self.rows:
            raise MetakitError("forest plot needs at least one row")
        total = sum(row.weight for row in self.rows)
        if abs(total - 1.0) > 1e-9:
            raise MetakitError(f"row weights must sum to 1, got {total!r}")
        if any(row.weight <= 0 for row in self.rows):
            raise MetakitError("every row weight must be > 0")
        if self.axis_scale not in ("linear", "log"):
            raise MetakitError(f"unknown axis scale {self.axis_scale!r}")
        expected_null = 1.0 if self.axis_scale == "log" else 0.0
        if self.null_line != expected_null:
            raise MetakitError(
                f"null line must be {expected_null:g} on a {self.axis_scale} axis, got {self.null_line!r}"
            )


def forest_spec(
    effects: Sequence[EffectEstimate],
    pooled: PooledResult,
    heterogeneity: HeterogeneityReport | None = None,
    ci_level: float = 0.95,
) -> ForestSpec:
    """Build a ForestSpec from per-study effects and their pooled result."""
    z_crit = float(norm.ppf((1 + ci_level) / 2))
    rows = tuple(
        ForestRow(
            label=e.study_id,
            value=e.value,
            ci_low=e.value - z_crit * e.se,
            ci_high=e.value + z_crit * e.se,
            weight=pooled.weights[e.study_id],
        )
        for e in effects
    )
    is_ratio = effects[0].measure in RATIO_MEASURES
    return ForestSpec(
        rows=rows,
        summary_estimate=pooled.estimate,
        summary_ci_low=pooled.ci_low,
        summary_ci_high=pooled.ci_high,
        null_line=1.0 if is_ratio else 0.0,
        axis_scale="log" if is_ratio else "linear",
        ci_level=ci_level,
        heterogeneity=heterogeneity,
    )


def _scale(lo: float, hi: float):
    span = hi - lo
    if span <= 0:
        lo, hi, span = lo - 1.0, hi + 1.0, 2.0
    pad = 0.04 * span

    def to_x(value: float) -> float:
        return _PLOT_X0 + (value - (lo - pad)) / (span + 2 * pad) * (_PLOT_X1 - _PLOT_X0)

    return to_x, lo - pad, hi + pad


def _fmt_axis(value: float, axis_scale: str) -> str:
    shown = math.exp(value) if axis_scale == "log" else value
    return f"{shown:.3g}"


def _display_value(value: float, axis_scale: str) -> float:
    return math.exp(value) if axis_scale == "log" else value


def svg_forest(spec: ForestSpec) -> str:
    """Forest plot: per-study squares sized by sqrt(weight) with CI whiskers,
    a summary diamond, the no-effect line, and a heterogeneity footer."""
    k = len(spec.rows)
    height = FOREST_EXTRA + ROW_HEIGHT * k
    # data coordinates: analysis scale; the no-effect line sits at 0 there
    # for both axis kinds because log(1) == 0
    bounds = [0.0, spec.summary_ci_low, spec.summary_ci_high]
    for row in spec.rows:
        bounds.extend((row.ci_low, row.ci_high))
    to_x, _, _ = _scale(min(bounds), max(bounds))

    axis_y = ROW_HEIGHT * k + 36
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{FOREST_WIDTH}" height="{height}" '
        f'viewBox="0 0 {FOREST_WIDTH} {height}">\n'
        "<style>text { font-family: monospace; font-size: 11px; fill: #222; }</style>\n"
    ]
    parts.append(
        f'<line class="null-line" x1="{to_x(0.0):.2f}" y1="10.00" '
        f'x2="{to_x(0.0):.2f}" y2="{axis_y:.2f}" stroke="#888" stroke-dasharray="4 3"/>\n'
    )
    ci_pct = f"{spec.ci_level * 100:g}%"
    for i, row in enumerate(spec.rows):
        cy = 22 + ROW_HEIGHT * i
        side = 18 * math.sqrt(row.weight)
        parts.append(f'<text class="study-label" x="8" y="{cy + 4:.2f}">{_esc(row.label)}</text>\n')
        parts.append(
            f'<line class="ci-segment" x1="{to_x(row.ci_low):.2f}" y1="{cy:.2f}" '
            f'x2="{to_x(row.ci_high):.2f}" y2="{cy:.2f}" stroke="#222" stroke-width="1.2"/>\n'
        )
        parts.append(
            f'<rect class="study-square" x="{to_x(row.value) - side / 2:.2f}" '
            f'y="{cy - side / 2:.2f}" width="{side:.2f}" height="{side:.2f}" fill="#38538c"/>\n'
        )
        parts.append(
            f'<text class="study-value" x="620" y="{cy + 4:.2f}">'
            f"{_display_value(row.value, spec.axis_scale):.2f} "
            f"({_display_value(row.ci_low, spec.axis_scale):.2f}, "
            f"{_display_value(row.ci_high, spec.axis_scale):.2f})  {row.weight * 100:.1f}%</text>\n"
        )

    dy = 22 + ROW_HEIGHT * k
    dx_low, dx_mid, dx_high = to_x(spec.summary_ci_low), to_x(spec.summary_estimate), to_x(spec.summary_ci_high)
    parts.append(f'<text class="summary-label" x="8" y="{dy + 4:.2f}">Pooled ({ci_pct} CI)</text>\n')
    parts.append(
        f'<polygon class="summary-diamond" points="'
        f'{dx_low:.2f},{dy:.2f} {dx_mid:.2f},{dy - 8:.2f} {dx_high:.2f},{dy:.2f} {dx_mid:.2f},{dy + 8:.2f}" '
        'fill="#7a1f1f"/>\n'
    )
    significant = not (spec.summary_ci_low <= 0.0 <= spec.summary_ci_high)
    null_shown = f"{spec.null_line:g}"
    verdict = (
        f"significant: {ci_pct} CI excludes {null_shown}"
        if significant
        else f"not significant: {ci_pct} CI includes {null_shown}"
    )
    parts.append(
        f'<text class="summary-value" x="620" y="{dy + 4:.2f}">'
        f"{_display_value(spec.summary_estimate, spec.axis_scale):.2f} "
        f"({_display_value(spec.summary_ci_low, spec.axis_scale):.2f}, "
        f"{_display_value(spec.summary_ci_high, spec.axis_scale):.2f})</text>\n"
    )
    parts.append(f'<text class="significance" x="8" y="{axis_y + 22:.2f}">{_esc(verdict)}</text>\n')

    parts.append(
        f'<line class="axis" x1="{_PLOT_X0:.2f}" y1="{axis_y:.2f}" '
        f'x2="{_PLOT_X1:.2f}" y2="{axis_y:.2f}" stroke="#222"/>\n'
    )
    for value in _axis_ticks(bounds):
        x = to_x(value)
        parts.append(
            f'<line class="tick" x1="{x:.2f}" y1="{axis_y:.2f}" x2="{x:.2f}" y2="{axis_y + 4:.2f}" stroke="#222"/>\n'
            f'<text class="tick-label" x="{x - 8:.2f}" y="{axis_y + 15:.2f}">{_fmt_axis(value, spec.axis_scale)}</text>\n'
        )
    if spec.heterogeneity is not None:
        het = spec.heterogeneity
        parts.append(
            f'<text class="het-line" x="{_PLOT_X0:.2f}" y="{axis_y + 22:.2f}">'
            f"Heterogeneity: Q = {het.q:.3f}, df = {het.df}, p = {format_p(het.p)}, "
            f"I&#178; = {het.i2:.1f}%</text>\n"
        )
    parts.append("</svg>\n")
    return "".join(parts)


def _axis_ticks(bounds: Sequence[float]) -> tuple[float, float, float]:
    lo, hi = min(bounds), max(bounds)
    if hi <= lo:
        lo, hi = lo - 1.0, hi + 1.0
    return (lo, (lo + hi) / 2, hi)


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


FUNNEL_WIDTH = 800
FUNNEL_HEIGHT = 520

_FX0, _FX1 = 80.0, 760.0
_FY0, _FY1 = 60.0, 460.0


def svg_funnel(points: Sequence[FunnelPoint], pooled_value: float) -> str:
    """Funnel plot: effect value vs standard error with the y-axis inverted
    (most precise studies at the top). Original studies render as white
    circles, imputed ones as black; a vertical line marks the pooled value."""
    if not points:
        raise MetakitError("funnel plot needs at least one point")
    xs = [p.x for p in points] + [pooled_value]
    lo, hi = min(xs), max(xs)
    span = hi - lo
    if span <= 0:
        lo, hi, span = lo - 1.0, hi + 1.0, 2.0
    pad = 0.06 * span
    max_se = max(p.y for p in points) * 1.08

    def to_x(v: float) -> float:
        return _FX0 + (v - (lo - pad)) / (span + 2 * pad) * (_FX1 - _FX0)

    def to_y(se: float) -> float:
        return _FY0 + se / max_se * (_FY1 - _FY0)

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{FUNNEL_WIDTH}" height="{FUNNEL_HEIGHT}" '
        f'viewBox="0 0 {FUNNEL_WIDTH} {FUNNEL_HEIGHT}">\n'
        "<style>text { font-family: monospace; font-size: 11px; fill: #222; }</style>\n"
        f'<line class="axis" x1="{_FX0:.2f}" y1="{_FY0:.2f}" x2="{_FX0:.2f}" y2="{_FY1:.2f}" stroke="#222"/>\n'
        f'<line class="axis" x1="{_FX0:.2f}" y1="{_FY1:.2f}" x2="{_FX1:.2f}" y2="{_FY1:.2f}" stroke="#222"/>\n'
    ]
    parts.append(
        f'<line class="pooled-line" x1="{to_x(pooled_value):.2f}" y1="{_FY0:.2f}" '
        f'x2="{to_x(pooled_value):.2f}" y2="{_FY1:.2f}" stroke="#888" stroke-dasharray="4 3"/>\n'
    )
    # inverted axis: the top tick is numerically smaller than the bottom tick
    for se in (0.0, max_se / 2, max_se):
        y = to_y(se)
        parts.append(
            f'<line class="tick" x1="{_FX0 - 4:.2f}" y1="{y:.2f}" x2="{_FX0:.2f}" y2="{y:.2f}" stroke="#222"/>\n'
            f'<text class="tick-label" x="{_FX0 - 46:.2f}" y="{y + 4:.2f}">{se:.3g}</text>\n'
        )
    for value in (lo, (lo + hi) / 2, hi):
        x = to_x(value)
        parts.append(
            f'<line class="tick" x1="{x:.2f}" y1="{_FY1:.2f}" x2="{x:.2f}" y2="{_FY1 + 4:.2f}" stroke="#222"/>\n'
            f'<text class="tick-label" x="{x - 8:.2f}" y="{_FY1 + 16:.2f}">{value:.3g}</text>\n'
        )
    parts.append(f'<text class="axis-label" x="{_FX0 - 46:.2f}" y="{_FY0 - 10:.2f}">SE</text>\n')
    for p in points:
        fill = "black" if p.imputed else "white"
        parts.append(
            f'<circle class="funnel-point" cx="{to_x(p.x):.2f}" cy="{to_y(p.y):.2f}" r="5" '
            f'fill="{fill}" stroke="#222"/>\n'
        )
    parts.append("</svg>\n")
    return "".join(parts)


def render_forest(spec: ForestSpec, path: str | Path) -> None:
    """Write the forest plot SVG to `path` (UTF-8, LF newlines)."""
    Path(path).write_text(svg_forest(spec), encoding="utf-8", newline="\n")


def render_funnel(points: Sequence[FunnelPoint], pooled_value: float, path: str | Path) -> None:
    """Write the funnel plot SVG to `path` (UTF-8, LF newlines)."""
    Path(path).write_text(svg_funnel(points, pooled_value), encoding="utf-8", newline="\n")
