"""Analysis assembly and JSON-ready serialization.

Numbers are emitted as plain floats (json round-trips Python floats exactly),
with ratio measures additionally carrying exponentiated display values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Sequence

from . import __version__
from .effects import RATIO_MEASURES, ContinuityPolicy, EffectEstimate, compute_effects
from .errors import MetakitError
from .heterogeneity import HeterogeneityReport, heterogeneity_report
from .plots import format_p
from .pooling import PooledResult, pool
from .publication_bias import StabilityVerdict, TrimFillResult, trim_and_fill
from .quality import QualityScore, Rubric, grade_distribution
from .sensitivity import LeaveOneOutRow, RobustnessVerdict, leave_one_out, robustness_verdict
from .studies import Dataset, PrismaCounts, prisma_summary


@dataclass(frozen=True)
class AnalysisReport:
    """Bundled results of one full analysis run.

    Optional sections stay None when not computed; quality scores must
    reference studies present in the dataset.
    """

    dataset_kind: str
    measure: str
    ci_level: float
    effects: tuple[EffectEstimate, ...]
    pooled: PooledResult
    heterogeneity: HeterogeneityReport
    bias: TrimFillResult | None = None
    sensitivity: tuple[LeaveOneOutRow, ...] | None = None
    robustness: RobustnessVerdict | None = None
    quality: tuple[QualityScore, ...] | None = None
    quality_distribution: dict[str, int] | None = None
    prisma: PrismaCounts | None = None

    def __post_init__(self):
        known = {e.study_id for e in self.effects}
        if self.quality:
            for score in self.quality:
                if score.study_id not in known:
                    raise MetakitError(
                        f"quality score references study {score.study_id!r} which is not in the dataset"
                    )


def analyze(
    dataset: Dataset,
    measure: str,
    model: str = "random",
    ci_level: float = 0.95,
    alpha: float = 0.1,
    hedges_correction: bool = False,
    continuity: float = 0.5,
    with_bias: bool = False,
    with_sensitivity: bool = False,
    quality_scores: Sequence[QualityScore] | None = None,
    rubric: Rubric | None = None,
    prisma: PrismaCounts | None = None,
) -> AnalysisReport:
    """Run the pipeline: effects, pooling, heterogeneity, and optional extras."""
    effects = compute_effects(
        dataset, measure, hedges_correction=hedges_correction, policy=ContinuityPolicy(continuity)
    )
    pooled = pool(effects, model, ci_level)
    het = heterogeneity_report(effects, alpha)
    bias = trim_and_fill(effects, model, ci_level) if with_bias else None
    rows = robustness = None
    if with_sensitivity:
        rows = leave_one_out(effects, model, ci_level)
        robustness = robustness_verdict(rows, pooled)
    distribution = None
    if quality_scores is not None and rubric is not None:
        distribution = grade_distribution(quality_scores, rubric)
    return AnalysisReport(
        dataset_kind=dataset.kind,
        measure=effects[0].measure,
        ci_level=ci_level,
        effects=effects,
        pooled=pooled,
        heterogeneity=het,
        bias=bias,
        sensitivity=rows,
        robustness=robustness,
        quality=tuple(quality_scores) if quality_scores is not None else None,
        quality_distribution=distribution,
        prisma=prisma,
    )


def effect_dict(effect: EffectEstimate) -> dict[str, Any]:
    out: dict[str, Any] = {
        "study_id": effect.study_id,
        "measure": effect.measure,
        "value": effect.value,
        "variance": effect.variance,
        "se": effect.se,
        "n_total": effect.n_total,
    }
    if effect.subgroup is not None:
        out["subgroup"] = effect.subgroup
    if effect.measure in RATIO_MEASURES:
        out["display_value"] = math.exp(effect.value)
    return out


def pooled_dict(pooled: PooledResult, measure: str) -> dict[str, Any]:
    out: dict[str, Any] = {
        "model": pooled.model,
        "k": pooled.k,
        "measure": measure,
        "estimate": pooled.estimate,
        "variance": pooled.variance,
        "se": pooled.se,
        "ci_low": pooled.ci_low,
        "ci_high": pooled.ci_high,
        "z": pooled.z,
        "p": pooled.p,
        "p_display": format_p(pooled.p),
        "tau2": pooled.tau2,
        "weights": dict(pooled.weights),
        "significant": pooled.significant(),
    }
    if measure in RATIO_MEASURES:
        out["display"] = {
            "scale": "ratio",
            "estimate": math.exp(pooled.estimate),
            "ci_low": math.exp(pooled.ci_low),
            "ci_high": math.exp(pooled.ci_high),
        }
    else:
        out["display"] = {
            "scale": "linear",
            "estimate": pooled.estimate,
            "ci_low": pooled.ci_low,
            "ci_high": pooled.ci_high,
        }
    return out


def heterogeneity_dict(het: HeterogeneityReport) -> dict[str, Any]:
    return {
        "q": het.q,
        "df": het.df,
        "p": het.p,
        "p_display": format_p(het.p),
        "i2": het.i2,
        "band": het.band,
        "alpha": het.alpha,
        "significant": het.significant,
    }


def bias_dict(result: TrimFillResult, measure: str, verdict: StabilityVerdict | None = None) -> dict[str, Any]:
    out: dict[str, Any] = {
        "side": result.side,
        "k0": result.k0,
        "iterations": result.iterations,
        "imputed": [effect_dict(e) for e in result.imputed],
        "original": pooled_dict(result.original, measure),
        "adjusted": pooled_dict(result.adjusted, measure),
    }
    if verdict is not None:
        out["stability"] = {
            "stable": verdict.stable,
            "difference": verdict.difference,
            "threshold": verdict.threshold,
        }
    return out


def sensitivity_dict(
    rows: Sequence[LeaveOneOutRow],
    measure: str,
    verdict: RobustnessVerdict | None = None,
) -> dict[str, Any]:
    out: dict[str, Any] = {
        "rows": [
            {
                "omitted_study_id": row.omitted_study_id,
                "sign_flip": row.sign_flip,
                "result": pooled_dict(row.result, measure),
            }
            for row in rows
        ]
    }
    if verdict is not None:
        out["verdict"] = {"robust": verdict.robust, "flagged": list(verdict.flagged)}
    return out


def quality_dict(
    scores: Sequence[QualityScore],
    rubric: Rubric,
    distribution: dict[str, int] | None = None,
) -> dict[str, Any]:
    return {
        "rubric": rubric.name,
        "max_total": rubric.max_total,
        "scores": [
            {
                "study_id": s.study_id,
                "points": list(s.points),
                "total": s.total,
                "grade": s.grade,
            }
            for s in scores
        ],
        "distribution": distribution if distribution is not None else grade_distribution(scores, rubric),
    }


def prisma_dict(counts: PrismaCounts) -> dict[str, Any]:
    return {
        "identified_db": counts.identified_db,
        "identified_other": counts.identified_other,
        "after_dedup": counts.after_dedup,
        "records_excluded": counts.records_excluded,
        "fulltext_assessed": counts.fulltext_assessed,
        "fulltext_excluded": dict(counts.fulltext_excluded),
        "included": counts.included,
        "summary": prisma_summary(counts).splitlines(),
    }


def meta_dict(invocation: Sequence[str] | None = None) -> dict[str, Any]:
    out: dict[str, Any] = {"tool": "metakit", "version": __version__}
    if invocation is not None:
        out["invocation"] = list(invocation)
    return out


def report_dict(report: AnalysisReport, invocation: Sequence[str] | None = None) -> dict[str, Any]:
    """Top-level JSON document; sections appear only when they were computed."""
    out: dict[str, Any] = {
        "meta": meta_dict(invocation),
        "dataset": {"kind": report.dataset_kind, "k": len(report.effects), "ci_level": report.ci_level},
        "effects": [effect_dict(e) for e in report.effects],
        "pooled": pooled_dict(report.pooled, report.measure),
        "heterogeneity": heterogeneity_dict(report.heterogeneity),
    }
    if report.bias is not None:
        out["bias"] = bias_dict(report.bias, report.measure)
    if report.sensitivity is not None:
        out["sensitivity"] = sensitivity_dict(report.sensitivity, report.measure, report.robustness)
    if report.quality is not None:
        out["quality"] = {
            "rubric": report.quality[0].rubric_name if report.quality else None,
            "scores": [
                {"study_id": s.study_id, "points": list(s.points), "total": s.total, "grade": s.grade}
                for s in report.quality
            ],
            "distribution": report.quality_distribution,
        }
    if report.prisma is not None:
        out["prisma"] = prisma_dict(report.prisma)
    return out
