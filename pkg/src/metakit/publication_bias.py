"""Funnel-plot coordinates and the trim-and-fill adjustment.

Trim-and-fill estimates how many studies are missing from one side of the
funnel, removes ("trims") the most extreme studies on the overrepresented
side until the remainder is symmetric, then mirrors ("fills") the trimmed
studies about the symmetric center and re-pools everything. A small adjusted
vs original difference supports the original estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .effects import EffectEstimate
from .errors import ConvergenceError, InsufficientStudiesError, MetakitError
from .pooling import PooledResult, pool

#: iteration cap for the missing-study count to stabilize
MAX_ITERATIONS = 20


@dataclass(frozen=True)
class FunnelPoint:
    """One funnel-plot point: effect value (x) against standard error (y)."""

    study_id: str
    x: float
    y: float
    imputed: bool = False


@dataclass(frozen=True)
class TrimFillResult:
    """Outcome of the trim-and-fill procedure, including the re-pooled estimate."""

    side: str
    k0: int
    imputed: tuple[EffectEstimate, ...]
    original: PooledResult
    adjusted: PooledResult
    iterations: int


@dataclass(frozen=True)
class StabilityVerdict:
    """Comparison of original vs adjusted estimates against a tolerance."""

    stable: bool
    difference: float
    threshold: float


def funnel_points(effects: Sequence[EffectEstimate]) -> tuple[FunnelPoint, ...]:
    """One point per effect, in input order; y is the standard error."""
    if len(effects) < 2:
        raise InsufficientStudiesError(f"funnel plot needs at least 2 studies, got {len(effects)}")
    return tuple(FunnelPoint(e.study_id, e.value, math.sqrt(e.variance)) for e in effects)


def _midranks(magnitudes: Sequence[float]) -> list[float]:
    order = sorted(range(len(magnitudes)), key=lambda i: magnitudes[i])
    ranks = [0.0] * len(magnitudes)
    pos = 0
    while pos < len(order):
        end = pos
        while end + 1 < len(order) and magnitudes[order[end + 1]] == magnitudes[order[pos]]:
            end += 1
        avg = (pos + end) / 2 + 1
        for j in range(pos, end + 1):
            ranks[order[j]] = avg
        pos = end + 1
    return ranks


def _round_half_away(x: float) -> int:
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


def _extreme_indices(values: Sequence[float], side: str, count: int) -> set[int]:
    """The `count` most extreme indices on `side`; ties go to the earlier index."""
    if count == 0:
        return set()
    if side == "right":
        order = sorted(range(len(values)), key=lambda i: (-values[i], i))
    else:
        order = sorted(range(len(values)), key=lambda i: (values[i], i))
    return set(order[:count])


def _fixed_mean(values: Sequence[float], variances: Sequence[float]) -> float:
    total = sum(1 / v for v in variances)
    return sum(x / v for x, v in zip(values, variances)) / total


def _fill_id(study_id: str, taken: set[str]) -> str:
    candidate = f"{study_id} (imputed)"
    while candidate in taken:
        candidate += "*"
    taken.add(candidate)
    return candidate


def trim_and_fill(
    effects: Sequence[EffectEstimate],
    model: str,
    ci_level: float = 0.95,
) -> TrimFillResult:
    """Iterative trim-and-fill with the rank-based L0 missing-study estimator.

    Each pass pools the currently untrimmed studies with fixed weights,
    centers every study at that estimate, and ranks absolute deviations with
    midranks for ties. The heavier side (larger rank sum, detected on the
    first pass) supplies S, and
    L0 = max(0, round((4*S - k(k+1)) / (2k - 1))) with half-away-from-zero
    rounding; the L0 most extreme same-side studies are trimmed and the loop
    repeats until L0 is stable or MAX_ITERATIONS is hit. Filled studies are
    mirror images of the trimmed ones about the final trimmed estimate with
    identical variances; the adjusted result pools originals plus fills under
    the caller's model.
    """
    n = len(effects)
    if n < 3:
        raise InsufficientStudiesError(f"trim-and-fill needs at least 3 studies, got {n}")
    values = [e.value for e in effects]
    variances = [e.variance for e in effects]
    side: str | None = None
    trimmed = 0
    iterations = 0
    converged = False
    while iterations < MAX_ITERATIONS:
        iterations += 1
        trim_idx = _extreme_indices(values, side, trimmed) if side else set()
        center = _fixed_mean(
            [v for i, v in enumerate(values) if i not in trim_idx],
            [v for i, v in enumerate(variances) if i not in trim_idx],
        )
        centered = [v - center for v in values]
        ranks = _midranks([abs(c) for c in centered])
        s_right = sum(r for r, c in zip(ranks, centered) if c > 0)
        s_left = sum(r for r, c in zip(ranks, centered) if c < 0)
        if side is None:
            side = "right" if s_right >= s_left else "left"
        s = s_right if side == "right" else s_left
        same_side = sum(1 for c in centered if (c > 0 if side == "right" else c < 0))
        k0 = max(0, _round_half_away((4 * s - n * (n + 1)) / (2 * n - 1)))
        k0 = min(k0, same_side, n - 1)
        if k0 == trimmed:
            converged = True
            break
        trimmed = k0
    if not converged:
        raise ConvergenceError(
            f"missing-study count did not stabilize within {MAX_ITERATIONS} iterations", k0=trimmed
        )

    original = pool(effects, model, ci_level)
    if trimmed == 0:
        return TrimFillResult(
            side=side, k0=0, imputed=(), original=original, adjusted=original, iterations=iterations
        )

    trim_idx = _extreme_indices(values, side, trimmed)
    center = _fixed_mean(
        [v for i, v in enumerate(values) if i not in trim_idx],
        [v for i, v in enumerate(variances) if i not in trim_idx],
    )
    taken = {e.study_id for e in effects}
    imputed = tuple(
        EffectEstimate(
            study_id=_fill_id(effects[i].study_id, taken),
            measure=effects[i].measure,
            value=2 * center - effects[i].value,
            variance=effects[i].variance,
            n_total=effects[i].n_total,
            subgroup=effects[i].subgroup,
        )
        for i in sorted(trim_idx)
    )
    adjusted = pool(tuple(effects) + imputed, model, ci_level)
    return TrimFillResult(
        side=side, k0=trimmed, imputed=imputed, original=original, adjusted=adjusted, iterations=iterations
    )


def compare_adjusted(result: TrimFillResult, threshold: float) -> StabilityVerdict:
    """Stable when |original - adjusted| <= threshold (closed inequality)."""
    if threshold <= 0:
        raise MetakitError(f"threshold must be > 0, got {threshold!r}")
    difference = abs(result.original.estimate - result.adjusted.estimate)
    return StabilityVerdict(stable=difference <= threshold, difference=difference, threshold=threshold)
