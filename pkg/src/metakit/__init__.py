"""metakit: evidence-synthesis toolkit.

Computes per-study effect sizes, pools them under fixed- or random-effects
models, quantifies heterogeneity, adjusts for publication bias via
trim-and-fill, runs leave-one-out sensitivity analysis, scores study quality
against rubrics, and renders forest/funnel plots as deterministic SVG.
"""

__version__ = "0.1.0"

from .effects import (
    MEASURE_KEYS,
    MEASURES,
    RATIO_MEASURES,
    ContinuityPolicy,
    EffectEstimate,
    compute_effects,
    fisher_z,
    log_odds_ratio,
    log_risk_ratio,
    mean_diff,
    smd,
)
from .errors import (
    ConsistencyError,
    ConvergenceError,
    DegenerateStudyError,
    DuplicateStudyError,
    InsufficientStudiesError,
    MeasureMismatchError,
    MetakitError,
    SchemaError,
    StudyValidationError,
)
from .heterogeneity import (
    HeterogeneityReport,
    SubgroupReport,
    cochran_q,
    heterogeneity_report,
    i2_band,
    i2_from_q,
    subgroup_analysis,
)
from .plots import ForestRow, ForestSpec, forest_spec, render_forest, render_funnel, svg_forest, svg_funnel
from .pooling import MODELS, PooledResult, dersimonian_laird_tau2, pool, pool_fixed, pool_random
from .publication_bias import (
    FunnelPoint,
    StabilityVerdict,
    TrimFillResult,
    compare_adjusted,
    funnel_points,
    trim_and_fill,
)
from .quality import (
    QualityScore,
    Rubric,
    RubricItem,
    builtin_rubric,
    grade_distribution,
    load_rubric,
    parse_rubric,
    score_study,
)
from .report import AnalysisReport, analyze, report_dict
from .sensitivity import LeaveOneOutRow, RobustnessVerdict, leave_one_out, robustness_verdict
from .studies import (
    BinaryStudy,
    ContinuousStudy,
    CorrelationStudy,
    Dataset,
    PrismaCounts,
    load_dataset,
    load_prisma_counts,
    parse_prisma_counts,
    prisma_summary,
    save_dataset,
)
