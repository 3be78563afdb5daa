"""Methodological quality scoring against declarative rubrics.

Two rubrics ship built in: `miniscrew` (7 items, max 11, grades
Low/Medium/Medium-high/High) and `crowding` (10 items, grades
Low/Moderate/High). Custom rubrics load from a key=value text file.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .errors import MetakitError, SchemaError, StudyValidationError


@dataclass(frozen=True)
class RubricItem:
    item_id: str
    label: str
    allowed: tuple[int, ...]
    cap: int

    def __post_init__(self):
        if not self.allowed:
            raise SchemaError(f"item {self.item_id!r}: needs at least one allowed value")
        if self.cap < max(self.allowed):
            raise SchemaError(
                f"item {self.item_id!r}: cap {self.cap} is below the largest allowed value {max(self.allowed)}"
            )


@dataclass(frozen=True)
class Rubric:
    """Ordered scoring items plus contiguous grade bands covering 0..max_total."""

    name: str
    items: tuple[RubricItem, ...]
    grade_bands: tuple[tuple[int, int, str], ...]

    def __post_init__(self):
        if not self.items:
            raise SchemaError(f"rubric {self.name!r}: no items")
        expected_low = 0
        for low, high, grade in self.grade_bands:
            if low != expected_low or high < low:
                raise SchemaError(
                    f"rubric {self.name!r}: bands must be contiguous and non-overlapping "
                    f"from 0; band {low}-{high} ({grade}) breaks that"
                )
            expected_low = high + 1
        if expected_low != self.max_total + 1:
            raise SchemaError(
                f"rubric {self.name!r}: bands cover 0..{expected_low - 1} "
                f"but the maximum total is {self.max_total}"
            )

    @property
    def max_total(self) -> int:
        return sum(item.cap for item in self.items)

    def grade_for(self, total: int) -> str:
        for low, high, grade in self.grade_bands:
            if low <= total <= high:
                return grade
        raise MetakitError(f"total {total} outside rubric {self.name!r} range 0..{self.max_total}")

    @property
    def grades(self) -> tuple[str, ...]:
        return tuple(grade for _, _, grade in self.grade_bands)


@dataclass(frozen=True)
class QualityScore:
    """Per-item awarded points with the capped total and its grade."""

    study_id: str
    rubric_name: str
    points: tuple[int, ...]
    total: int
    grade: str


# The crowding rubric's caries-recording item allows 3 (visual plus
# radiographic evidence scored together), so the attainable maximum is 25
# and the High band tops out there.
_BUILTIN = {}

_BUILTIN["miniscrew"] = Rubric(
    name="miniscrew",
    items=(
        RubricItem("selection_process", "Description of the selection process", (0, 1, 2), 2),
        RubricItem("prospective", "Prospective rather than retrospective design", (0, 2), 2),
        RubricItem("consecutive", "Consecutive case enrolment", (0, 1), 1),
        RubricItem("sample_size", "Sample size of at least 20", (0, 1), 1),
        RubricItem("outcome_measure", "Selection of the outcome measure", (0, 1, 2), 2),
        RubricItem("measurement_error", "Assessment of measurement error", (0, 1, 2), 2),
        RubricItem("statistics", "Appropriateness of statistical methods", (0, 1), 1),
    ),
    grade_bands=((0, 6, "Low"), (7, 8, "Medium"), (9, 10, "Medium-high"), (11, 11, "High")),
)

_BUILTIN["crowding"] = Rubric(
    name="crowding",
    items=(
        RubricItem("study_type", "Study design (longitudinal 2, cross-sectional 1)", (0, 1, 2), 2),
        RubricItem("blinding", "Blinding of assessors", (0, 2), 2),
        RubricItem("reporting", "Adequate reporting of subject criteria (1 per factor)", (0, 1, 2, 3), 3),
        RubricItem("comparator", "Control group quality", (0, 1, 2, 3), 3),
        RubricItem("caries_method", "Validity and reliability of caries recording", (0, 1, 2, 3), 3),
        RubricItem("crowding_method", "Validity and reliability of crowding recording", (0, 1, 2), 2),
        RubricItem("measurement_error", "Error of measurement (1 per factor)", (0, 1, 2), 2),
        RubricItem("confounders", "Confounding factors considered (1 per factor)", (0, 1, 2, 3, 4, 5), 5),
        RubricItem("subgrouping", "Subgrouping by age and severity (1 per factor)", (0, 1, 2), 2),
        RubricItem("coding", "Coding of subjects and variables", (0, 1), 1),
    ),
    grade_bands=((0, 8, "Low"), (9, 16, "Moderate"), (17, 25, "High")),
)


def builtin_rubric(name: str) -> Rubric:
    """Return a built-in rubric by name; raises listing the available names."""
    try:
        return _BUILTIN[name]
    except KeyError:
        raise MetakitError(
            f"unknown rubric {name!r}; available rubrics: {', '.join(sorted(_BUILTIN))}"
        ) from None


def score_study(rubric: Rubric, study_id: str, points: Sequence[int] | Mapping[str, int]) -> QualityScore:
    """Validate per-item awards against the rubric and grade the capped total.

    `points` is either a sequence aligned with the rubric's item order or a
    mapping item_id -> value (missing items score 0).
    """
    if isinstance(points, Mapping):
        unknown = set(points) - {item.item_id for item in rubric.items}
        if unknown:
            raise StudyValidationError(
                f"study {study_id!r}: unknown rubric item(s) {sorted(unknown)}", study_id=study_id
            )
        values = [int(points.get(item.item_id, 0)) for item in rubric.items]
    else:
        if len(points) != len(rubric.items):
            raise StudyValidationError(
                f"study {study_id!r}: expected {len(rubric.items)} item values, got {len(points)}",
                study_id=study_id,
            )
        values = [int(v) for v in points]
    awarded = []
    for item, value in zip(rubric.items, values):
        if value not in item.allowed:
            raise StudyValidationError(
                f"study {study_id!r}: item {item.item_id!r} cannot be awarded {value}; "
                f"allowed values are {list(item.allowed)}",
                study_id=study_id,
                field=item.item_id,
            )
        awarded.append(min(value, item.cap))
    total = sum(awarded)
    return QualityScore(
        study_id=study_id,
        rubric_name=rubric.name,
        points=tuple(awarded),
        total=total,
        grade=rubric.grade_for(total),
    )


def grade_distribution(scores: Sequence[QualityScore], rubric: Rubric) -> dict[str, int]:
    """Counts per grade over one rubric's scores; zero-count grades included."""
    counts = {grade: 0 for grade in rubric.grades}
    for score in scores:
        if score.rubric_name != rubric.name:
            raise MetakitError(
                f"score for study {score.study_id!r} uses rubric {score.rubric_name!r}, "
                f"cannot mix with {rubric.name!r}"
            )
        counts[score.grade] += 1
    return counts


def parse_rubric(text: str) -> Rubric:
    """Parse a rubric from key=value lines.

    Format: one `name=<rubric name>` line, one line per item
    `item.<id>=<label>|<comma-separated allowed values>|<cap>`, and one line
    per band `band=<min>-<max>:<grade>`. Item and band order follow the file.
    """
    name = None
    items: list[RubricItem] = []
    bands: list[tuple[int, int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise SchemaError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key == "name":
            name = value
        elif key.startswith("item."):
            parts = value.split("|")
            if len(parts) != 3:
                raise SchemaError(f"line {lineno}: item needs <label>|<allowed values>|<cap>")
            label, allowed_raw, cap_raw = parts
            try:
                allowed = tuple(int(v) for v in allowed_raw.split(","))
                cap = int(cap_raw)
            except ValueError:
                raise SchemaError(f"line {lineno}: allowed values and cap must be integers") from None
            items.append(RubricItem(key[len("item."):], label.strip(), allowed, cap))
        elif key == "band":
            span, _, grade = value.partition(":")
            low_raw, _, high_raw = span.partition("-")
            try:
                bands.append((int(low_raw), int(high_raw), grade.strip()))
            except ValueError:
                raise SchemaError(f"line {lineno}: band needs <min>-<max>:<grade>") from None
        else:
            raise SchemaError(f"line {lineno}: unknown key {key!r}")
    if name is None:
        raise SchemaError("rubric file is missing a name= line")
    return Rubric(name=name, items=tuple(items), grade_bands=tuple(bands))


def load_rubric(path: str | Path) -> Rubric:
    with open(path, encoding="utf-8") as fh:
        return parse_rubric(fh.read())


def load_scores_csv(path: str | Path, rubric: Rubric) -> tuple[QualityScore, ...]:
    """Load per-study awards from CSV with header `study_id,<item ids in rubric order>`."""
    import csv

    expected = ("study_id",) + tuple(item.item_id for item in rubric.items)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected header {','.join(expected)}") from None
        if tuple(header) != expected:
            raise SchemaError(
                f"{path}: header must be {','.join(expected)} for rubric {rubric.name!r}, "
                f"got {','.join(header)}"
            )
        scores = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(expected):
                raise SchemaError(f"{path}:{lineno}: expected {len(expected)} fields, got {len(row)}")
            study_id = row[0]
            try:
                points = [int(v) for v in row[1:]]
            except ValueError:
                raise StudyValidationError(
                    f"study {study_id!r}: item awards must be integers", study_id=study_id
                ) from None
            scores.append(score_study(rubric, study_id, points))
    return tuple(scores)
