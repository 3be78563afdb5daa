"""Between-study heterogeneity: Cochran's Q, I^2 bands, subgroup decomposition.

The Q-test defaults to a significance level of 0.1 rather than 0.05 because
meta-analyses typically pool few studies and the test is underpowered.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from scipy.stats import chi2

from .effects import EffectEstimate
from .errors import InsufficientStudiesError, StudyValidationError
from .pooling import PooledResult, pool, q_statistic

#: I^2 bands, half-open so every value gets exactly one label:
#: [0, 25] low, (25, 75] moderate, (75, 100] substantial
I2_BANDS = ((25.0, "low"), (75.0, "moderate"), (100.0, "substantial"))


@dataclass(frozen=True)
class HeterogeneityReport:
    """Q statistic with df, chi-square p-value, I^2 percentage and its band."""

    q: float
    df: int
    p: float
    i2: float
    band: str
    alpha: float

    @property
    def significant(self) -> bool:
        """True when the Q-test rejects homogeneity at `alpha`."""
        return self.p < self.alpha


def i2_from_q(q: float, df: int) -> float:
    """I^2 percentage: 100 * max(0, (Q - df) / Q); zero when Q is zero."""
    if q <= 0:
        return 0.0
    return max(0.0, (q - df) / q) * 100.0


def i2_band(i2: float) -> str:
    """Classify an I^2 percentage into low / moderate / substantial."""
    if not 0 <= i2 <= 100:
        raise StudyValidationError(f"I^2 must be a percentage in [0, 100], got {i2!r}")
    for upper, label in I2_BANDS:
        if i2 <= upper:
            return label
    return I2_BANDS[-1][1]


def cochran_q(effects: Sequence[EffectEstimate]) -> tuple[float, int]:
    """Cochran's Q (weighted squared deviations from the fixed-effect mean) and df = k-1."""
    return q_statistic(effects)


def heterogeneity_report(effects: Sequence[EffectEstimate], alpha: float = 0.1) -> HeterogeneityReport:
    """Run the Q-test and classify I^2.

    `alpha` must lie in (0, 1); the p-value is the upper chi-square tail of Q
    at k-1 degrees of freedom.
    """
    if not 0 < alpha < 1:
        raise StudyValidationError(f"alpha must be in (0, 1), got {alpha!r}")
    q, df = q_statistic(effects)
    p = float(chi2.sf(q, df))
    i2 = i2_from_q(q, df)
    return HeterogeneityReport(q=q, df=df, p=p, i2=i2, band=i2_band(i2), alpha=alpha)


@dataclass(frozen=True)
class SubgroupReport:
    """Per-group pooled results plus the between-group Q decomposition."""

    groups: Mapping[str, PooledResult]
    q_between: float
    df_between: int
    p_between: float


def subgroup_analysis(
    effects: Sequence[EffectEstimate],
    model: str,
    ci_level: float = 0.95,
) -> SubgroupReport:
    """Pool each subgroup separately and test for between-group differences.

    Q_between = Q_total - sum of within-group Q, all computed with fixed
    weights so the decomposition is additive; the per-group pooled results
    honor the requested model. Every effect needs a non-empty subgroup label,
    there must be at least two groups, and every group at least two studies.
    """
    order: list[str] = []
    grouped: dict[str, list[EffectEstimate]] = {}
    for e in effects:
        if not e.subgroup:
            raise StudyValidationError(
                f"study {e.study_id!r} has no subgroup label", study_id=e.study_id, field="subgroup"
            )
        if e.subgroup not in grouped:
            order.append(e.subgroup)
            grouped[e.subgroup] = []
        grouped[e.subgroup].append(e)
    if len(order) < 2:
        raise InsufficientStudiesError(f"subgroup analysis needs at least 2 groups, got {len(order)}")
    for label in order:
        if len(grouped[label]) < 2:
            raise InsufficientStudiesError(
                f"subgroup {label!r} has {len(grouped[label])} study; each group needs at least 2"
            )
    q_total, _ = q_statistic(effects)
    q_within = sum(q_statistic(grouped[label])[0] for label in order)
    q_between = max(0.0, q_total - q_within)
    df_between = len(order) - 1
    p_between = float(chi2.sf(q_between, df_between))
    groups = {label: pool(grouped[label], model, ci_level) for label in order}
    return SubgroupReport(groups=groups, q_between=q_between, df_between=df_between, p_between=p_between)
