"""Pydantic request/response models for the HTTP service.

Requests mirror the CSV schemas (binary studies arrive as events/totals);
responses mirror the JSON documents the CLI emits, so both clients see the
same shapes.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, model_validator

from ..studies import BinaryStudy, ContinuousStudy, CorrelationStudy, Dataset, PrismaCounts


class ContinuousStudyIn(BaseModel):
    study_id: str
    n_e: int
    mean_e: float
    sd_e: float
    n_c: int
    mean_c: float
    sd_c: float
    subgroup: str | None = None

    def to_study(self) -> ContinuousStudy:
        return ContinuousStudy(
            study_id=self.study_id,
            n_e=self.n_e,
            mean_e=self.mean_e,
            sd_e=self.sd_e,
            n_c=self.n_c,
            mean_c=self.mean_c,
            sd_c=self.sd_c,
            subgroup=self.subgroup,
        )


class BinaryStudyIn(BaseModel):
    study_id: str
    events_e: int
    total_e: int
    events_c: int
    total_c: int
    subgroup: str | None = None

    def to_study(self) -> BinaryStudy:
        return BinaryStudy.from_totals(
            study_id=self.study_id,
            events_e=self.events_e,
            total_e=self.total_e,
            events_c=self.events_c,
            total_c=self.total_c,
            subgroup=self.subgroup,
        )


class CorrelationStudyIn(BaseModel):
    study_id: str
    r: float
    n: int
    subgroup: str | None = None

    def to_study(self) -> CorrelationStudy:
        return CorrelationStudy(study_id=self.study_id, r=self.r, n=self.n, subgroup=self.subgroup)


StudyIn = ContinuousStudyIn | BinaryStudyIn | CorrelationStudyIn

_KIND_MODEL = {
    "continuous": ContinuousStudyIn,
    "binary": BinaryStudyIn,
    "correlation": CorrelationStudyIn,
}


class DatasetIn(BaseModel):
    kind: Literal["continuous", "binary", "correlation"]
    studies: list[StudyIn]

    @model_validator(mode="after")
    def _studies_match_kind(self) -> "DatasetIn":
        expected = _KIND_MODEL[self.kind]
        for study in self.studies:
            if not isinstance(study, expected):
                raise ValueError(
                    f"study {study.study_id!r} does not match dataset kind {self.kind!r}"
                )
        return self

    def to_dataset(self) -> Dataset:
        return Dataset(kind=self.kind, studies=tuple(s.to_study() for s in self.studies))


class EffectsRequest(BaseModel):
    dataset: DatasetIn
    measure: Literal["md", "smd", "or", "rr", "z"]
    hedges: bool = False
    continuity: float = 0.5


class PoolRequest(EffectsRequest):
    model: Literal["fixed", "random"] = "random"
    ci_level: float = 0.95
    alpha: float = 0.1


class BiasRequest(PoolRequest):
    threshold: float | None = None


class SensitivityRequest(PoolRequest):
    pass


class StudyScoresIn(BaseModel):
    study_id: str
    points: list[int]


class QualityRequest(BaseModel):
    rubric: str | None = None
    rubric_text: str | None = None
    scores: list[StudyScoresIn]

    @model_validator(mode="after")
    def _exactly_one_rubric(self) -> "QualityRequest":
        if (self.rubric is None) == (self.rubric_text is None):
            raise ValueError("provide exactly one of rubric (built-in name) or rubric_text")
        return self


class PrismaRequest(BaseModel):
    identified_db: int = 0
    identified_other: int = 0
    after_dedup: int = 0
    records_excluded: int = 0
    fulltext_assessed: int = 0
    fulltext_excluded: dict[str, int] = {}
    included: int = 0

    def to_counts(self) -> PrismaCounts:
        return PrismaCounts(
            identified_db=self.identified_db,
            identified_other=self.identified_other,
            after_dedup=self.after_dedup,
            records_excluded=self.records_excluded,
            fulltext_assessed=self.fulltext_assessed,
            fulltext_excluded=dict(self.fulltext_excluded),
            included=self.included,
        )


class ReportRequest(PoolRequest):
    include_bias: bool = True
    include_sensitivity: bool = True
    quality: QualityRequest | None = None
    prisma: PrismaRequest | None = None


# --- responses ---------------------------------------------------------------


class EffectOut(BaseModel):
    study_id: str
    measure: str
    value: float
    variance: float
    se: float
    n_total: int
    subgroup: str | None = None
    display_value: float | None = None


class DisplayOut(BaseModel):
    scale: str
    estimate: float
    ci_low: float
    ci_high: float


class PooledOut(BaseModel):
    model: str
    k: int
    measure: str
    estimate: float
    variance: float
    se: float
    ci_low: float
    ci_high: float
    z: float
    p: float
    p_display: str
    tau2: float
    weights: dict[str, float]
    significant: bool
    display: DisplayOut


class HeterogeneityOut(BaseModel):
    q: float
    df: int
    p: float
    p_display: str
    i2: float
    band: str
    alpha: float
    significant: bool


class EffectsResponse(BaseModel):
    effects: list[EffectOut]


class PoolResponse(BaseModel):
    effects: list[EffectOut]
    pooled: PooledOut
    heterogeneity: HeterogeneityOut


class StabilityOut(BaseModel):
    stable: bool
    difference: float
    threshold: float


class BiasOut(BaseModel):
    side: str
    k0: int
    iterations: int
    imputed: list[EffectOut]
    original: PooledOut
    adjusted: PooledOut
    stability: StabilityOut | None = None


class BiasResponse(BaseModel):
    bias: BiasOut


class SensitivityRowOut(BaseModel):
    omitted_study_id: str
    sign_flip: bool
    result: PooledOut


class RobustnessOut(BaseModel):
    robust: bool
    flagged: list[str]


class SensitivityResponse(BaseModel):
    full: PooledOut
    rows: list[SensitivityRowOut]
    verdict: RobustnessOut


class QualityScoreOut(BaseModel):
    study_id: str
    points: list[int]
    total: int
    grade: str


class QualityResponse(BaseModel):
    rubric: str
    max_total: int
    scores: list[QualityScoreOut]
    distribution: dict[str, int]


class PrismaResponse(BaseModel):
    identified_db: int
    identified_other: int
    after_dedup: int
    records_excluded: int
    fulltext_assessed: int
    fulltext_excluded: dict[str, int]
    included: int
    summary: list[str]


class HealthResponse(BaseModel):
    status: str
    tool: str
    version: str
