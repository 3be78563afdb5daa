"""Leave-one-out sensitivity analysis.

Each row re-runs the full pooling (including tau^2 re-estimation under the
random-effects model) on the k-1 remaining studies, so rows are independent
meta-analyses rather than weight-frozen approximations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .effects import EffectEstimate
from .errors import InsufficientStudiesError, MetakitError
from .pooling import PooledResult, pool


@dataclass(frozen=True)
class LeaveOneOutRow:
    """Re-analysis with one study omitted; sign_flip marks a changed CI verdict."""

    omitted_study_id: str
    result: PooledResult
    sign_flip: bool


@dataclass(frozen=True)
class RobustnessVerdict:
    """Overall stability call with the study ids that change the conclusion."""

    robust: bool
    flagged: tuple[str, ...]


def leave_one_out(
    effects: Sequence[EffectEstimate],
    model: str,
    ci_level: float = 0.95,
) -> tuple[LeaveOneOutRow, ...]:
    """One row per omitted study, in input order.

    sign_flip compares each row's CI significance verdict (null value 0
    outside the interval) against the full-data analysis under the same
    model and CI level.
    """
    if len(effects) < 3:
        raise InsufficientStudiesError(
            f"leave-one-out needs at least 3 studies so every re-analysis keeps 2, got {len(effects)}"
        )
    full = pool(effects, model, ci_level)
    full_significant = full.significant()
    rows = []
    for i, omitted in enumerate(effects):
        subset = tuple(e for j, e in enumerate(effects) if j != i)
        result = pool(subset, model, ci_level)
        rows.append(
            LeaveOneOutRow(
                omitted_study_id=omitted.study_id,
                result=result,
                sign_flip=result.significant() != full_significant,
            )
        )
    return tuple(rows)


def _sign(x: float) -> int:
    return (x > 0) - (x < 0)


def robustness_verdict(rows: Sequence[LeaveOneOutRow], full: PooledResult) -> RobustnessVerdict:
    """Robust when no omission flips CI significance or the estimate's sign."""
    if not rows:
        raise MetakitError("robustness verdict needs at least one leave-one-out row")
    flagged = tuple(
        row.omitted_study_id
        for row in rows
        if row.sign_flip or _sign(row.result.estimate) != _sign(full.estimate)
    )
    return RobustnessVerdict(robust=not flagged, flagged=flagged)
