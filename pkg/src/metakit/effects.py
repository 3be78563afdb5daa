"""Per-study effect estimates with sampling variances on the analysis scale.

Ratio measures (odds ratio, risk ratio) are carried on the log scale so
inverse-variance weights are meaningful; exponentiation happens only at
reporting time. All functions are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateStudyError, MeasureMismatchError, StudyValidationError
from .studies import BinaryStudy, ContinuousStudy, CorrelationStudy, Dataset

MEASURES = ("MD", "SMD", "logOR", "logRR", "FisherZ")

#: measures whose natural display scale is the exponentiated ratio
RATIO_MEASURES = ("logOR", "logRR")

#: CLI/service measure keys -> canonical measure names
MEASURE_KEYS = {"md": "MD", "smd": "SMD", "or": "logOR", "rr": "logRR", "z": "FisherZ"}

#: which dataset kind each measure applies to
MEASURE_KIND = {"MD": "continuous", "SMD": "continuous", "logOR": "binary", "logRR": "binary", "FisherZ": "correlation"}


@dataclass(frozen=True)
class EffectEstimate:
    """One study's effect value and sampling variance on the analysis scale."""

    study_id: str
    measure: str
    value: float
    variance: float
    n_total: int
    subgroup: str | None = None

    def __post_init__(self):
        if self.measure not in MEASURES:
            raise MeasureMismatchError(f"unknown measure {self.measure!r}; expected one of {MEASURES}")
        if not math.isfinite(self.value):
            raise StudyValidationError(
                f"study {self.study_id!r}: effect value must be finite, got {self.value!r}",
                study_id=self.study_id,
                field="value",
            )
        if not math.isfinite(self.variance) or self.variance <= 0:
            raise StudyValidationError(
                f"study {self.study_id!r}: variance must be finite and > 0, got {self.variance!r}",
                study_id=self.study_id,
                field="variance",
            )

    @property
    def se(self) -> float:
        return math.sqrt(self.variance)


@dataclass(frozen=True)
class ContinuityPolicy:
    """Zero-cell handling for 2x2 tables: add `correction` to all four cells
    of a study when any of its cells is zero; other studies are untouched."""

    correction: float = 0.5
    mode: str = "affected-study-only"

    def __post_init__(self):
        if self.correction < 0:
            raise StudyValidationError(f"continuity correction must be >= 0, got {self.correction!r}")
        if self.mode != "affected-study-only":
            raise StudyValidationError(f"unknown continuity mode {self.mode!r}")

    def apply(self, study: BinaryStudy) -> tuple[float, float, float, float]:
        cells = (study.a, study.b, study.c, study.d)
        if min(cells) == 0:
            return tuple(cell + self.correction for cell in cells)
        return tuple(float(cell) for cell in cells)


def smd(study: ContinuousStudy, hedges_correction: bool = False) -> EffectEstimate:
    """Standardized mean difference: between-arm mean difference over the pooled SD.

    With `hedges_correction` the value is shrunk by J = 1 - 3/(4(n_e+n_c-2)-1)
    to remove small-sample bias; default off, so the plain pooled-SD form is
    reported. Variance is the large-sample form
    (n_e+n_c)/(n_e*n_c) + value^2/(2(n_e+n_c)).
    """
    n_e, n_c = study.n_e, study.n_c
    df = n_e + n_c - 2
    pooled_var = ((n_e - 1) * study.sd_e**2 + (n_c - 1) * study.sd_c**2) / df
    s_pooled = math.sqrt(pooled_var)
    if s_pooled == 0:
        raise DegenerateStudyError(
            f"study {study.study_id!r}: pooled SD is zero, standardized difference undefined"
        )
    value = (study.mean_e - study.mean_c) / s_pooled
    if hedges_correction:
        value *= 1 - 3 / (4 * df - 1)
    n = n_e + n_c
    variance = n / (n_e * n_c) + value**2 / (2 * n)
    return EffectEstimate(study.study_id, "SMD", value, variance, n, study.subgroup)


def mean_diff(study: ContinuousStudy) -> EffectEstimate:
    """Raw mean difference in outcome units; variance sd_e^2/n_e + sd_c^2/n_c."""
    value = study.mean_e - study.mean_c
    variance = study.sd_e**2 / study.n_e + study.sd_c**2 / study.n_c
    return EffectEstimate(study.study_id, "MD", value, variance, study.n_e + study.n_c, study.subgroup)


def log_odds_ratio(study: BinaryStudy, policy: ContinuityPolicy = ContinuityPolicy()) -> EffectEstimate:
    """Log odds ratio ln(ad/bc) with variance 1/a + 1/b + 1/c + 1/d.

    Cells are continuity-corrected per `policy` when any cell is zero; if a
    zero cell survives (correction 0) the odds ratio is undefined.
    """
    a, b, c, d = policy.apply(study)
    if min(a, b, c, d) <= 0:
        raise DegenerateStudyError(
            f"study {study.study_id!r}: odds ratio undefined, zero cell remains after continuity correction"
        )
    value = (math.log(a) + math.log(d)) - (math.log(b) + math.log(c))
    variance = (1 / a + 1 / b) + (1 / c + 1 / d)
    n_total = study.a + study.b + study.c + study.d
    return EffectEstimate(study.study_id, "logOR", value, variance, n_total, study.subgroup)


def log_risk_ratio(study: BinaryStudy, policy: ContinuityPolicy = ContinuityPolicy()) -> EffectEstimate:
    """Log risk ratio ln((a/(a+b)) / (c/(c+d))); variance 1/a - 1/(a+b) + 1/c - 1/(c+d)."""
    a, b, c, d = policy.apply(study)
    if a <= 0 or c <= 0:
        raise DegenerateStudyError(
            f"study {study.study_id!r}: risk ratio undefined, zero event count remains after continuity correction"
        )
    value = (math.log(a) - math.log(a + b)) - (math.log(c) - math.log(c + d))
    variance = (1 / a - 1 / (a + b)) + (1 / c - 1 / (c + d))
    n_total = study.a + study.b + study.c + study.d
    return EffectEstimate(study.study_id, "logRR", value, variance, n_total, study.subgroup)


def fisher_z(study: CorrelationStudy) -> EffectEstimate:
    """Fisher z-transform of a correlation, atanh(r), with variance 1/(n-3)."""
    value = math.atanh(study.r)
    variance = 1 / (study.n - 3)
    return EffectEstimate(study.study_id, "FisherZ", value, variance, study.n, study.subgroup)


def compute_effects(
    dataset: Dataset,
    measure: str,
    hedges_correction: bool = False,
    policy: ContinuityPolicy = ContinuityPolicy(),
) -> tuple[EffectEstimate, ...]:
    """Convert every study in a dataset to an effect estimate.

    `measure` accepts either a canonical name (MD, SMD, logOR, logRR, FisherZ)
    or its short key (md, smd, or, rr, z).
    """
    canonical = MEASURE_KEYS.get(measure, measure)
    if canonical not in MEASURES:
        raise MeasureMismatchError(
            f"unknown measure {measure!r}; expected one of {sorted(MEASURE_KEYS)} or {MEASURES}"
        )
    expected_kind = MEASURE_KIND[canonical]
    if dataset.kind != expected_kind:
        raise MeasureMismatchError(
            f"measure {canonical} requires a {expected_kind!r} dataset, got {dataset.kind!r}"
        )
    if canonical == "MD":
        return tuple(mean_diff(s) for s in dataset.studies)
    if canonical == "SMD":
        return tuple(smd(s, hedges_correction) for s in dataset.studies)
    if canonical == "logOR":
        return tuple(log_odds_ratio(s, policy) for s in dataset.studies)
    if canonical == "logRR":
        return tuple(log_risk_ratio(s, policy) for s in dataset.studies)
    return tuple(fisher_z(s) for s in dataset.studies)
