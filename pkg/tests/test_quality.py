import pytest

from metakit.errors import MetakitError, SchemaError, StudyValidationError
from metakit.quality import (
    RubricItem,
    builtin_rubric,
    grade_distribution,
    load_scores_csv,
    parse_rubric,
    score_study,
)

# the eight crowding-review study rows: per-item awards with their totals/grades
CROWDING_ROWS = [
    ("Hixon et al", (1, 0, 2, 3, 3, 1, 2, 3, 1, 0), 16, "moderate"),
    ("Roker and Arend", (1, 0, 2, 2, 1, 2, 0, 2, 0, 0), 10, "moderate"),
    ("Katz", (1, 0, 2, 1, 3, 2, 0, 4, 1, 0), 14, "moderate"),
    ("Addy et al", (1, 0, 2, 2, 1, 1, 0, 4, 0, 0), 11, "moderate"),
    ("Helm and Petersen", (1, 2, 3, 2, 1, 1, 0, 3, 0, 0), 13, "moderate"),
    ("Stahl and Grabowski", (1, 0, 2, 2, 1, 1, 0, 1, 0, 0), 8, "low"),
    ("Staufner and Landmesser", (1, 0, 3, 3, 1, 2, 1, 3, 2, 0), 16, "moderate"),
    ("Alsokman", (1, 0, 2, 2, 1, 1, 2, 2, 0, 0), 11, "moderate"),
]

# 12 prospective-trial rows scored on the miniscrew rubric: 8 Low, 4 Medium
MINISCREW_ROWS = [
    (1, 0, 0, 0, 1, 0, 1),
    (1, 0, 1, 0, 1, 0, 1),
    (2, 0, 0, 1, 1, 0, 1),
    (1, 0, 1, 1, 1, 1, 1),
    (2, 0, 1, 1, 1, 0, 1),
    (1, 0, 0, 1, 2, 0, 1),
    (0, 0, 1, 1, 1, 0, 1),
    (2, 0, 0, 0, 2, 1, 1),
    (2, 0, 1, 1, 1, 1, 1),
    (1, 2, 1, 1, 1, 1, 1),
    (2, 0, 1, 1, 2, 0, 1),
    (2, 2, 0, 1, 1, 1, 1),
]


def test_miniscrew_maximum_is_11_and_grades_high():
    rubric = builtin_rubric("miniscrew")
    assert rubric.max_total == 11
    assert rubric.grade_for(11) == "High"
    top = score_study(rubric, "best", (2, 2, 1, 1, 2, 2, 1))
    assert top.total == 11
    assert top.grade == "High"


def test_miniscrew_zero_grades_low():
    rubric = builtin_rubric("miniscrew")
    score = score_study(rubric, "none", (0, 0, 0, 0, 0, 0, 0))
    assert score.total == 0
    assert score.grade == "Low"


def test_crowding_24_grades_high():
    rubric = builtin_rubric("crowding")
    assert rubric.grade_for(24) == "High"
    assert rubric.grade_for(rubric.max_total) == "High"


@pytest.mark.parametrize("study_id,points,total,grade", CROWDING_ROWS)
def test_crowding_rows_reproduce_totals_and_grades(study_id, points, total, grade):
    rubric = builtin_rubric("crowding")
    score = score_study(rubric, study_id, points)
    assert score.total == total
    assert score.grade.lower() == grade


def test_crowding_distribution_1_low_7_moderate():
    rubric = builtin_rubric("crowding")
    scores = [score_study(rubric, sid, pts) for sid, pts, _, _ in CROWDING_ROWS]
    assert grade_distribution(scores, rubric) == {"Low": 1, "Moderate": 7, "High": 0}


def test_miniscrew_distribution_8_low_4_medium():
    rubric = builtin_rubric("miniscrew")
    scores = [score_study(rubric, f"t{i}", pts) for i, pts in enumerate(MINISCREW_ROWS)]
    assert grade_distribution(scores, rubric) == {
        "Low": 8,
        "Medium": 4,
        "Medium-high": 0,
        "High": 0,
    }


def test_empty_distribution_is_all_zero():
    rubric = builtin_rubric("miniscrew")
    assert grade_distribution([], rubric) == {"Low": 0, "Medium": 0, "Medium-high": 0, "High": 0}


def test_mixed_rubrics_rejected():
    crowding = builtin_rubric("crowding")
    miniscrew = builtin_rubric("miniscrew")
    score = score_study(miniscrew, "x", (1, 0, 0, 0, 0, 0, 0))
    with pytest.raises(MetakitError):
        grade_distribution([score], crowding)


def test_unknown_rubric_lists_available():
    with pytest.raises(MetakitError) as err:
        builtin_rubric("nope")
    message = str(err.value)
    assert "crowding" in message and "miniscrew" in message


def test_disallowed_item_value_names_item():
    rubric = builtin_rubric("miniscrew")
    with pytest.raises(StudyValidationError) as err:
        score_study(rubric, "x", (3, 0, 0, 0, 0, 0, 0))
    assert "selection_process" in str(err.value)


def test_mapping_input_with_missing_items_scores_zero():
    rubric = builtin_rubric("miniscrew")
    score = score_study(rubric, "x", {"prospective": 2, "statistics": 1})
    assert score.total == 3
    with pytest.raises(StudyValidationError):
        score_study(rubric, "x", {"unknown_item": 1})


def test_grade_monotone_in_any_item():
    rubric = builtin_rubric("miniscrew")
    order = {"Low": 0, "Medium": 1, "Medium-high": 2, "High": 3}
    base_points = [1, 0, 1, 1, 1, 1, 1]
    base = score_study(rubric, "x", base_points)
    for idx, item in enumerate(rubric.items):
        for value in item.allowed:
            if value <= base_points[idx]:
                continue
            bumped = list(base_points)
            bumped[idx] = value
            upgraded = score_study(rubric, "x", bumped)
            assert order[upgraded.grade] >= order[base.grade]


@pytest.mark.parametrize("name", ["miniscrew", "crowding"])
def test_every_total_maps_to_exactly_one_grade(name):
    rubric = builtin_rubric(name)
    for total in range(rubric.max_total + 1):
        matches = [g for lo, hi, g in rubric.grade_bands if lo <= total <= hi]
        assert len(matches) == 1


RUBRIC_FILE = """# custom example
name=pilot
item.design=Study design|0,1,2|2
item.blinding=Assessor blinding|0,2|2
item.size=Sample size adequate|0,1|1
band=0-2:Weak
band=3-5:Strong
"""


def test_rubric_file_parse_and_score(tmp_path):
    rubric = parse_rubric(RUBRIC_FILE)
    assert rubric.name == "pilot"
    assert rubric.max_total == 5
    assert [i.item_id for i in rubric.items] == ["design", "blinding", "size"]
    score = score_study(rubric, "p1", (2, 2, 0))
    assert score.total == 4
    assert score.grade == "Strong"


def test_rubric_bands_must_cover_range():
    bad = RUBRIC_FILE.replace("band=3-5:Strong", "band=3-4:Strong")
    with pytest.raises(SchemaError):
        parse_rubric(bad)


def test_rubric_bands_must_be_contiguous():
    bad = RUBRIC_FILE.replace("band=3-5:Strong", "band=4-5:Strong")
    with pytest.raises(SchemaError):
        parse_rubric(bad)


def test_item_cap_must_cover_allowed():
    with pytest.raises(SchemaError):
        RubricItem("x", "cap below allowed", (0, 3), 2)


def test_scores_csv_roundtrip(tmp_path):
    rubric = builtin_rubric("crowding")
    header = "study_id," + ",".join(i.item_id for i in rubric.items)
    lines = [header] + [
        sid.replace(" ", "_") + "," + ",".join(str(p) for p in pts)
        for sid, pts, _, _ in CROWDING_ROWS
    ]
    path = tmp_path / "scores.csv"
    path.write_text("\n".join(lines) + "\n")
    scores = load_scores_csv(path, rubric)
    assert [s.total for s in scores] == [t for _, _, t, _ in CROWDING_ROWS]


def test_scores_csv_bad_header(tmp_path):
    rubric = builtin_rubric("miniscrew")
    path = tmp_path / "scores.csv"
    path.write_text("study_id,wrong\nx,1\n")
    with pytest.raises(SchemaError):
        load_scores_csv(path, rubric)
