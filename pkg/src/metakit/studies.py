"""Study-level input records, CSV ingestion, and screening-flow counts.

Datasets are immutable after construction: every record is validated in its
constructor, so no partially-valid study can reach an analysis. CSV parsing
is deliberately strict (exact header, decimal point only, UTF-8) to keep
ingestion bit-exact and reproducible.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Union

from .errors import (
    ConsistencyError,
    DuplicateStudyError,
    SchemaError,
    StudyValidationError,
)

KINDS = ("continuous", "binary", "correlation")

CSV_COLUMNS = {
    "continuous": ("study_id", "n_e", "mean_e", "sd_e", "n_c", "mean_c", "sd_c"),
    "binary": ("study_id", "events_e", "total_e", "events_c", "total_c"),
    "correlation": ("study_id", "r", "n"),
}


def _require_id(study_id: str) -> str:
    if not isinstance(study_id, str) or study_id == "":
        raise StudyValidationError("study_id must be a non-empty string", field="study_id")
    return study_id


def _require_finite(value: float, study_id: str, name: str) -> float:
    if not math.isfinite(value):
        raise StudyValidationError(
            f"study {study_id!r}: {name} must be finite, got {value!r}",
            study_id=study_id,
            field=name,
        )
    return float(value)


@dataclass(frozen=True)
class ContinuousStudy:
    """Two-arm summary of a continuous outcome (means and SDs per arm)."""

    study_id: str
    n_e: int
    mean_e: float
    sd_e: float
    n_c: int
    mean_c: float
    sd_c: float
    subgroup: str | None = None

    def __post_init__(self):
        _require_id(self.study_id)
        for arm, n in (("n_e", self.n_e), ("n_c", self.n_c)):
            if not isinstance(n, int) or n < 2:
                raise StudyValidationError(
                    f"study {self.study_id!r}: {arm} must be an integer >= 2, got {n!r}",
                    study_id=self.study_id,
                    field=arm,
                )
        for name, value in (
            ("mean_e", self.mean_e),
            ("mean_c", self.mean_c),
            ("sd_e", self.sd_e),
            ("sd_c", self.sd_c),
        ):
            _require_finite(value, self.study_id, name)
        for name, sd in (("sd_e", self.sd_e), ("sd_c", self.sd_c)):
            if sd <= 0:
                raise StudyValidationError(
                    f"study {self.study_id!r}: {name} must be > 0, got {sd!r}",
                    study_id=self.study_id,
                    field=name,
                )


@dataclass(frozen=True)
class BinaryStudy:
    """2x2 events table: a/b = events/non-events in the experimental arm, c/d in control."""

    study_id: str
    a: int
    b: int
    c: int
    d: int
    subgroup: str | None = None

    def __post_init__(self):
        _require_id(self.study_id)
        for name, cell in (("a", self.a), ("b", self.b), ("c", self.c), ("d", self.d)):
            if not isinstance(cell, int) or cell < 0:
                raise StudyValidationError(
                    f"study {self.study_id!r}: cell {name} must be a non-negative integer, got {cell!r}",
                    study_id=self.study_id,
                    field=name,
                )
        if self.a + self.b < 1:
            raise StudyValidationError(
                f"study {self.study_id!r}: experimental arm is empty (a+b == 0)",
                study_id=self.study_id,
                field="a",
            )
        if self.c + self.d < 1:
            raise StudyValidationError(
                f"study {self.study_id!r}: control arm is empty (c+d == 0)",
                study_id=self.study_id,
                field="c",
            )

    @classmethod
    def from_totals(
        cls,
        study_id: str,
        events_e: int,
        total_e: int,
        events_c: int,
        total_c: int,
        subgroup: str | None = None,
    ) -> "BinaryStudy":
        """Build from per-arm events and totals; derives the non-event cells."""
        for name, events, total in (
            ("events_e", events_e, total_e),
            ("events_c", events_c, total_c),
        ):
            if events > total:
                raise StudyValidationError(
                    f"study {study_id!r}: {name} ({events}) exceeds its arm total ({total})",
                    study_id=study_id,
                    field=name,
                )
        return cls(
            study_id=study_id,
            a=events_e,
            b=total_e - events_e,
            c=events_c,
            d=total_c - events_c,
            subgroup=subgroup,
        )


@dataclass(frozen=True)
class CorrelationStudy:
    """A single correlation coefficient with its sample size."""

    study_id: str
    r: float
    n: int
    subgroup: str | None = None

    def __post_init__(self):
        _require_id(self.study_id)
        _require_finite(self.r, self.study_id, "r")
        if abs(self.r) >= 1:
            raise StudyValidationError(
                f"study {self.study_id!r}: |r| must be < 1, got {self.r!r}",
                study_id=self.study_id,
                field="r",
            )
        if not isinstance(self.n, int) or self.n < 4:
            raise StudyValidationError(
                f"study {self.study_id!r}: n must be an integer >= 4, got {self.n!r}",
                study_id=self.study_id,
                field="n",
            )


Study = Union[ContinuousStudy, BinaryStudy, CorrelationStudy]

_STUDY_TYPES = {
    "continuous": ContinuousStudy,
    "binary": BinaryStudy,
    "correlation": CorrelationStudy,
}


@dataclass(frozen=True)
class Dataset:
    """Homogeneous, ordered collection of studies of one kind."""

    kind: str
    studies: tuple[Study, ...]

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown dataset kind {self.kind!r}; expected one of {KINDS}")
        expected = _STUDY_TYPES[self.kind]
        seen: set[str] = set()
        for study in self.studies:
            if not isinstance(study, expected):
                raise StudyValidationError(
                    f"study {study.study_id!r} is {type(study).__name__}, "
                    f"but the dataset kind is {self.kind!r}"
                )
            if study.study_id in seen:
                raise DuplicateStudyError(f"duplicate study_id {study.study_id!r}")
            seen.add(study.study_id)

    def __len__(self) -> int:
        return len(self.studies)

    def study_ids(self) -> tuple[str, ...]:
        return tuple(s.study_id for s in self.studies)


def _parse_int(raw: str, study_id: str, column: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise StudyValidationError(
            f"study {study_id!r}: column {column!r} must be an integer, got {raw!r}",
            study_id=study_id,
            field=column,
        ) from None


def _parse_float(raw: str, study_id: str, column: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise StudyValidationError(
            f"study {study_id!r}: column {column!r} must be a number, got {raw!r}",
            study_id=study_id,
            field=column,
        ) from None
    return value


def load_dataset(path: str | Path, kind: str) -> Dataset:
    """Load and validate a CSV dataset of the given kind, preserving row order."""
    if kind not in KINDS:
        raise SchemaError(f"unknown dataset kind {kind!r}; expected one of {KINDS}")
    required = CSV_COLUMNS[kind]
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected header {','.join(required)}") from None
        if tuple(header) != required and tuple(header) != required + ("subgroup",):
            missing = [col for col in required if col not in header]
            if missing:
                raise SchemaError(f"{path}: header is missing column {missing[0]!r} for kind {kind!r}")
            raise SchemaError(
                f"{path}: header {','.join(header)!r} does not match the "
                f"{kind!r} schema {','.join(required)}[,subgroup]"
            )
        studies = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise SchemaError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            values = dict(zip(header, row))
            study_id = values["study_id"]
            subgroup = values.get("subgroup") or None
            if kind == "continuous":
                study = ContinuousStudy(
                    study_id=study_id,
                    n_e=_parse_int(values["n_e"], study_id, "n_e"),
                    mean_e=_parse_float(values["mean_e"], study_id, "mean_e"),
                    sd_e=_parse_float(values["sd_e"], study_id, "sd_e"),
                    n_c=_parse_int(values["n_c"], study_id, "n_c"),
                    mean_c=_parse_float(values["mean_c"], study_id, "mean_c"),
                    sd_c=_parse_float(values["sd_c"], study_id, "sd_c"),
                    subgroup=subgroup,
                )
            elif kind == "binary":
                study = BinaryStudy.from_totals(
                    study_id=study_id,
                    events_e=_parse_int(values["events_e"], study_id, "events_e"),
                    total_e=_parse_int(values["total_e"], study_id, "total_e"),
                    events_c=_parse_int(values["events_c"], study_id, "events_c"),
                    total_c=_parse_int(values["total_c"], study_id, "total_c"),
                    subgroup=subgroup,
                )
            else:
                study = CorrelationStudy(
                    study_id=study_id,
                    r=_parse_float(values["r"], study_id, "r"),
                    n=_parse_int(values["n"], study_id, "n"),
                    subgroup=subgroup,
                )
            studies.append(study)
    return Dataset(kind=kind, studies=tuple(studies))


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    """Write a dataset back to CSV; reloading yields an identical dataset.

    Floats are written with repr so values round-trip exactly. The subgroup
    column is emitted only when at least one study carries a label.
    """
    required = CSV_COLUMNS[dataset.kind]
    has_subgroup = any(s.subgroup is not None for s in dataset.studies)
    header = required + ("subgroup",) if has_subgroup else required
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for study in dataset.studies:
            if dataset.kind == "continuous":
                row = [
                    study.study_id,
                    study.n_e,
                    repr(study.mean_e),
                    repr(study.sd_e),
                    study.n_c,
                    repr(study.mean_c),
                    repr(study.sd_c),
                ]
            elif dataset.kind == "binary":
                row = [
                    study.study_id,
                    study.a,
                    study.a + study.b,
                    study.c,
                    study.c + study.d,
                ]
            else:
                row = [study.study_id, repr(study.r), study.n]
            if has_subgroup:
                row.append(study.subgroup if study.subgroup is not None else "")
            writer.writerow(row)


# --- screening flow ---------------------------------------------------------

_PRISMA_KEYS = (
    "identified_db",
    "identified_other",
    "after_dedup",
    "records_excluded",
    "fulltext_assessed",
    "included",
)


@dataclass(frozen=True)
class PrismaCounts:
    """Staged accounting of records through a systematic search."""

    identified_db: int = 0
    identified_other: int = 0
    after_dedup: int = 0
    records_excluded: int = 0
    fulltext_assessed: int = 0
    fulltext_excluded: Mapping[str, int] = field(default_factory=dict)
    included: int = 0

    def __post_init__(self):
        counts = {key: getattr(self, key) for key in _PRISMA_KEYS}
        counts.update({f"excluded.{reason}": n for reason, n in self.fulltext_excluded.items()})
        for name, value in counts.items():
            if not isinstance(value, int) or value < 0:
                raise ConsistencyError(f"count {name!r} must be a non-negative integer, got {value!r}")
        if self.after_dedup > self.identified_db + self.identified_other:
            raise ConsistencyError(
                f"after_dedup ({self.after_dedup}) exceeds identified_db + identified_other "
                f"({self.identified_db + self.identified_other})"
            )
        excluded_total = sum(self.fulltext_excluded.values())
        if self.included != self.fulltext_assessed - excluded_total:
            raise ConsistencyError(
                f"included ({self.included}) != fulltext_assessed ({self.fulltext_assessed}) "
                f"- sum of full-text exclusions ({excluded_total})"
            )


def parse_prisma_counts(text: str) -> PrismaCounts:
    """Parse flat key=value lines; exclusion reasons use `excluded.<reason>=<count>`."""
    plain: dict[str, int] = {}
    excluded: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise SchemaError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        try:
            count = int(value.strip())
        except ValueError:
            raise SchemaError(f"line {lineno}: count for {key!r} must be an integer, got {value!r}") from None
        if key.startswith("excluded."):
            excluded[key[len("excluded."):]] = count
        elif key in _PRISMA_KEYS:
            plain[key] = count
        else:
            raise SchemaError(f"line {lineno}: unknown key {key!r}; expected one of {_PRISMA_KEYS} or excluded.<reason>")
    return PrismaCounts(fulltext_excluded=excluded, **plain)


def load_prisma_counts(path: str | Path) -> PrismaCounts:
    with open(path, encoding="utf-8") as fh:
        return parse_prisma_counts(fh.read())


def prisma_summary(counts: PrismaCounts) -> str:
    """Fixed-layout text block of the screening flow.

    Always 5 stage lines plus one indented line per exclusion reason.
    """
    total_identified = counts.identified_db + counts.identified_other
    lines = [
        f"Records identified: {total_identified} "
        f"(database: {counts.identified_db}, other sources: {counts.identified_other})",
        f"Records after duplicates removed: {counts.after_dedup}",
        f"Records excluded on screening: {counts.records_excluded}",
        f"Full-text articles assessed for eligibility: {counts.fulltext_assessed}",
    ]
    for reason, n in counts.fulltext_excluded.items():
        lines.append(f"  excluded, {reason}: {n}")
    lines.append(f"Studies included in the synthesis: {counts.included}")
    return "\n".join(lines)
