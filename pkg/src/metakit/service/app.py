"""FastAPI application wrapping the analysis pipeline.

Run with: uvicorn metakit.service:app
Validation failures (bad study records, too few studies, mixed measures)
come back as HTTP 422 with the library's error message in `detail`.
"""

from __future__ import annotations

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from .. import __version__
from ..effects import ContinuityPolicy, compute_effects
from ..errors import MetakitError
from ..heterogeneity import heterogeneity_report
from ..plots import forest_spec, svg_forest, svg_funnel
from ..pooling import pool
from ..publication_bias import FunnelPoint, compare_adjusted, funnel_points, trim_and_fill
from ..quality import builtin_rubric, grade_distribution, parse_rubric, score_study
from ..report import (
    analyze,
    bias_dict,
    effect_dict,
    heterogeneity_dict,
    pooled_dict,
    prisma_dict,
    quality_dict,
    report_dict,
    sensitivity_dict,
)
from ..sensitivity import leave_one_out, robustness_verdict
from . import schemas


def _effects_for(request: schemas.EffectsRequest):
    dataset = request.dataset.to_dataset()
    return compute_effects(
        dataset,
        request.measure,
        hedges_correction=request.hedges,
        policy=ContinuityPolicy(request.continuity),
    )


def _rubric_for(request: schemas.QualityRequest):
    if request.rubric_text is not None:
        return parse_rubric(request.rubric_text)
    return builtin_rubric(request.rubric)


def create_app() -> FastAPI:
    app = FastAPI(
        title="metakit",
        version=__version__,
        description="Meta-analysis as a service: effect sizes, pooling, "
        "heterogeneity, publication-bias adjustment, sensitivity analysis, "
        "quality scoring, and SVG plots.",
    )

    @app.exception_handler(MetakitError)
    async def _validation_error(request: Request, exc: MetakitError) -> JSONResponse:
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> dict:
        return {"status": "ok", "tool": "metakit", "version": __version__}

    @app.post("/effects", response_model=schemas.EffectsResponse, response_model_exclude_none=True)
    def effects(request: schemas.EffectsRequest) -> dict:
        return {"effects": [effect_dict(e) for e in _effects_for(request)]}

    @app.post("/pool", response_model=schemas.PoolResponse, response_model_exclude_none=True)
    def pool_endpoint(request: schemas.PoolRequest) -> dict:
        effects = _effects_for(request)
        pooled = pool(effects, request.model, request.ci_level)
        het = heterogeneity_report(effects, request.alpha)
        return {
            "effects": [effect_dict(e) for e in effects],
            "pooled": pooled_dict(pooled, effects[0].measure),
            "heterogeneity": heterogeneity_dict(het),
        }

    @app.post("/heterogeneity", response_model=schemas.HeterogeneityOut)
    def heterogeneity_endpoint(request: schemas.PoolRequest) -> dict:
        effects = _effects_for(request)
        return heterogeneity_dict(heterogeneity_report(effects, request.alpha))

    @app.post("/bias", response_model=schemas.BiasResponse, response_model_exclude_none=True)
    def bias(request: schemas.BiasRequest) -> dict:
        effects = _effects_for(request)
        result = trim_and_fill(effects, request.model, request.ci_level)
        verdict = compare_adjusted(result, request.threshold) if request.threshold is not None else None
        return {"bias": bias_dict(result, effects[0].measure, verdict)}

    @app.post("/sensitivity", response_model=schemas.SensitivityResponse, response_model_exclude_none=True)
    def sensitivity(request: schemas.SensitivityRequest) -> dict:
        effects = _effects_for(request)
        rows = leave_one_out(effects, request.model, request.ci_level)
        full = pool(effects, request.model, request.ci_level)
        verdict = robustness_verdict(rows, full)
        doc = sensitivity_dict(rows, effects[0].measure, verdict)
        return {"full": pooled_dict(full, effects[0].measure), "rows": doc["rows"], "verdict": doc["verdict"]}

    @app.post("/quality", response_model=schemas.QualityResponse)
    def quality(request: schemas.QualityRequest) -> dict:
        rubric = _rubric_for(request)
        scores = [score_study(rubric, s.study_id, s.points) for s in request.scores]
        return quality_dict(scores, rubric, grade_distribution(scores, rubric))

    @app.post("/prisma", response_model=schemas.PrismaResponse)
    def prisma(request: schemas.PrismaRequest) -> dict:
        return prisma_dict(request.to_counts())

    @app.post("/report")
    def report(request: schemas.ReportRequest) -> dict:
        dataset = request.dataset.to_dataset()
        quality_scores = rubric = None
        if request.quality is not None:
            rubric = _rubric_for(request.quality)
            quality_scores = [score_study(rubric, s.study_id, s.points) for s in request.quality.scores]
        result = analyze(
            dataset,
            request.measure,
            model=request.model,
            ci_level=request.ci_level,
            alpha=request.alpha,
            hedges_correction=request.hedges,
            continuity=request.continuity,
            with_bias=request.include_bias,
            with_sensitivity=request.include_sensitivity,
            quality_scores=quality_scores,
            rubric=rubric,
            prisma=request.prisma.to_counts() if request.prisma is not None else None,
        )
        return report_dict(result)

    @app.post("/plots/forest")
    def forest_plot(request: schemas.PoolRequest) -> Response:
        effects = _effects_for(request)
        pooled = pool(effects, request.model, request.ci_level)
        het = heterogeneity_report(effects, request.alpha)
        svg = svg_forest(forest_spec(effects, pooled, het, request.ci_level))
        return Response(content=svg, media_type="image/svg+xml")

    @app.post("/plots/funnel")
    def funnel_plot(request: schemas.BiasRequest) -> Response:
        effects = _effects_for(request)
        result = trim_and_fill(effects, request.model, request.ci_level)
        points = funnel_points(effects) + tuple(
            FunnelPoint(e.study_id, e.value, e.se, imputed=True) for e in result.imputed
        )
        svg = svg_funnel(points, result.adjusted.estimate)
        return Response(content=svg, media_type="image/svg+xml")

    return app


app = create_app()
