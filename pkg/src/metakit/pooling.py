"""Inverse-variance pooling under fixed- and random-effects models.

The random-effects model uses the DerSimonian-Laird moment estimator for the
between-study variance tau^2 (truncated at zero). Confidence intervals and
two-sided p-values come from the standard normal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from scipy.stats import norm

from .effects import EffectEstimate
from .errors import (
    DegenerateStudyError,
    DuplicateStudyError,
    InsufficientStudiesError,
    MeasureMismatchError,
    MetakitError,
)

MODELS = ("fixed", "random")


@dataclass(frozen=True)
class PooledResult:
    """Pooled estimate with CI, z-test, tau^2, and normalized per-study weights."""

    model: str
    k: int
    estimate: float
    variance: float
    ci_low: float
    ci_high: float
    z: float
    p: float
    tau2: float
    weights: Mapping[str, float]

    @property
    def se(self) -> float:
        return math.sqrt(self.variance)

    def significant(self, null_value: float = 0.0) -> bool:
        """True when the null value lies outside the confidence interval."""
        return not (self.ci_low <= null_value <= self.ci_high)


def _check_effects(effects: Sequence[EffectEstimate]) -> None:
    if len(effects) < 2:
        raise InsufficientStudiesError(f"pooling needs at least 2 studies, got {len(effects)}")
    measures = {e.measure for e in effects}
    if len(measures) > 1:
        raise MeasureMismatchError(f"cannot pool mixed measures {sorted(measures)}")
    seen: set[str] = set()
    for e in effects:
        if e.study_id in seen:
            raise DuplicateStudyError(f"duplicate study_id {e.study_id!r} in one analysis")
        seen.add(e.study_id)


def _weighted_pool(
    effects: Sequence[EffectEstimate],
    weights: Sequence[float],
    model: str,
    tau2: float,
    ci_level: float,
) -> PooledResult:
    if not 0 < ci_level < 1:
        raise MetakitError(f"ci_level must be in (0, 1), got {ci_level!r}")
    total = sum(weights)
    estimate = sum(w * e.value for w, e in zip(weights, effects)) / total
    variance = 1 / total
    se = math.sqrt(variance)
    z_crit = float(norm.ppf((1 + ci_level) / 2))
    z = estimate / se
    p = float(2 * norm.sf(abs(z)))
    return PooledResult(
        model=model,
        k=len(effects),
        estimate=estimate,
        variance=variance,
        ci_low=estimate - z_crit * se,
        ci_high=estimate + z_crit * se,
        z=z,
        p=p,
        tau2=tau2,
        weights={e.study_id: w / total for w, e in zip(weights, effects)},
    )


def q_statistic(effects: Sequence[EffectEstimate]) -> tuple[float, int]:
    """Cochran's Q and its degrees of freedom (k-1), using fixed weights."""
    _check_effects(effects)
    weights = [1 / e.variance for e in effects]
    total = sum(weights)
    estimate = sum(w * e.value for w, e in zip(weights, effects)) / total
    q = sum(w * (e.value - estimate) ** 2 for w, e in zip(weights, effects))
    return q, len(effects) - 1


def pool_fixed(effects: Sequence[EffectEstimate], ci_level: float = 0.95) -> PooledResult:
    """Fixed-effect pooling: weights are inverse sampling variances."""
    _check_effects(effects)
    weights = [1 / e.variance for e in effects]
    return _weighted_pool(effects, weights, "fixed", 0.0, ci_level)


def dersimonian_laird_tau2(effects: Sequence[EffectEstimate]) -> float:
    """DerSimonian-Laird moment estimate of the between-study variance.

    With fixed weights w_i = 1/v_i and Q Cochran's statistic,
    tau^2 = max(0, (Q - (k-1)) / C) where C = sum(w) - sum(w^2)/sum(w).
    """
    q, df = q_statistic(effects)
    weights = [1 / e.variance for e in effects]
    total = sum(weights)
    c = total - sum(w * w for w in weights) / total
    if c <= 0:
        raise DegenerateStudyError("between-study variance undefined: single effective study (C = 0)")
    return max(0.0, (q - df) / c)


def pool_random(
    effects: Sequence[EffectEstimate],
    ci_level: float = 0.95,
    tau2: float | None = None,
) -> PooledResult:
    """Random-effects pooling with weights 1/(v_i + tau^2).

    tau^2 defaults to the DerSimonian-Laird estimate; pass an explicit value
    to pool under a fixed heterogeneity assumption.
    """
    _check_effects(effects)
    if tau2 is None:
        tau2 = dersimonian_laird_tau2(effects)
    weights = [1 / (e.variance + tau2) for e in effects]
    return _weighted_pool(effects, weights, "random", tau2, ci_level)


def pool(effects: Sequence[EffectEstimate], model: str, ci_level: float = 0.95) -> PooledResult:
    """Dispatch to pool_fixed or pool_random by model name."""
    if model == "fixed":
        return pool_fixed(effects, ci_level)
    if model == "random":
        return pool_random(effects, ci_level)
    raise MeasureMismatchError(f"unknown model {model!r}; expected one of {MODELS}")
