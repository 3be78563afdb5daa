import pytest

from metakit.errors import (
    ConsistencyError,
    DuplicateStudyError,
    SchemaError,
    StudyValidationError,
)
from metakit.studies import (
    BinaryStudy,
    ContinuousStudy,
    CorrelationStudy,
    Dataset,
    PrismaCounts,
    load_dataset,
    parse_prisma_counts,
    prisma_summary,
    save_dataset,
)

CONTINUOUS_CSV = """study_id,n_e,mean_e,sd_e,n_c,mean_c,sd_c
alpha,10,1.5,0.4,12,1.2,0.5
beta,8,2.25,0.3,9,2.0,0.35
"""

BINARY_CSV = """study_id,events_e,total_e,events_c,total_c,subgroup
b1,10,30,12,28,early
b2,5,40,9,41,late
"""


def test_load_continuous_two_rows(tmp_path):
    path = tmp_path / "cont.csv"
    path.write_text(CONTINUOUS_CSV)
    ds = load_dataset(path, "continuous")
    assert ds.kind == "continuous"
    assert len(ds) == 2
    assert ds.studies[0] == ContinuousStudy("alpha", 10, 1.5, 0.4, 12, 1.2, 0.5)
    assert ds.study_ids() == ("alpha", "beta")


def test_load_binary_derives_cells(tmp_path):
    path = tmp_path / "bin.csv"
    path.write_text(BINARY_CSV)
    ds = load_dataset(path, "binary")
    first = ds.studies[0]
    assert (first.a, first.b, first.c, first.d) == (10, 20, 12, 16)
    assert first.subgroup == "early"


def test_binary_events_exceed_total_is_row_error(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("study_id,events_e,total_e,events_c,total_c\nb1,31,30,5,20\n")
    with pytest.raises(StudyValidationError) as err:
        load_dataset(path, "binary")
    assert err.value.study_id == "b1"
    assert "events_e" in str(err.value)


def test_correlation_r_at_boundary_rejected(tmp_path):
    path = tmp_path / "corr.csv"
    path.write_text("study_id,r,n\nc1,1.0,30\n")
    with pytest.raises(StudyValidationError) as err:
        load_dataset(path, "correlation")
    assert "|r|" in str(err.value)


def test_missing_column_named_in_schema_error(tmp_path):
    path = tmp_path / "cont.csv"
    path.write_text("study_id,n_e,mean_e,sd_e,n_c,mean_c\nx,5,1,1,5,1\n")
    with pytest.raises(SchemaError) as err:
        load_dataset(path, "continuous")
    assert "sd_c" in str(err.value)


def test_duplicate_study_id_rejected(tmp_path):
    path = tmp_path / "dup.csv"
    path.write_text(
        "study_id,n_e,mean_e,sd_e,n_c,mean_c,sd_c\nsame,5,1,1,5,1,1\nsame,6,2,1,6,1,1\n"
    )
    with pytest.raises(DuplicateStudyError) as err:
        load_dataset(path, "continuous")
    assert "same" in str(err.value)


def test_blank_subgroup_means_none(tmp_path):
    path = tmp_path / "sub.csv"
    path.write_text("study_id,r,n,subgroup\nc1,0.4,25,\nc2,0.1,30,young\n")
    ds = load_dataset(path, "correlation")
    assert ds.studies[0].subgroup is None
    assert ds.studies[1].subgroup == "young"


@pytest.mark.parametrize("kind,csv_text", [
    ("continuous", CONTINUOUS_CSV),
    ("binary", BINARY_CSV),
    ("correlation", "study_id,r,n\nc1,0.30000000000000004,25\nc2,-0.125,44\n"),
])
def test_save_load_roundtrip_identical(tmp_path, kind, csv_text):
    src = tmp_path / "src.csv"
    src.write_text(csv_text)
    ds = load_dataset(src, kind)
    out = tmp_path / "out.csv"
    save_dataset(ds, out)
    assert load_dataset(out, kind) == ds


@pytest.mark.parametrize("bad", [
    dict(study_id="", n_e=5, mean_e=1.0, sd_e=1.0, n_c=5, mean_c=1.0, sd_c=1.0),
    dict(study_id="x", n_e=1, mean_e=1.0, sd_e=1.0, n_c=5, mean_c=1.0, sd_c=1.0),
    dict(study_id="x", n_e=5, mean_e=1.0, sd_e=0.0, n_c=5, mean_c=1.0, sd_c=1.0),
    dict(study_id="x", n_e=5, mean_e=float("nan"), sd_e=1.0, n_c=5, mean_c=1.0, sd_c=1.0),
    dict(study_id="x", n_e=5, mean_e=1.0, sd_e=1.0, n_c=5, mean_c=1.0, sd_c=float("inf")),
])
def test_continuous_validation_is_total(bad):
    with pytest.raises(StudyValidationError):
        ContinuousStudy(**bad)


def test_binary_empty_arm_rejected():
    with pytest.raises(StudyValidationError):
        BinaryStudy("x", 0, 0, 5, 5)
    with pytest.raises(StudyValidationError):
        BinaryStudy("x", 3, 2, -1, 5)


def test_correlation_needs_n_of_4():
    with pytest.raises(StudyValidationError):
        CorrelationStudy("x", 0.5, 3)
    CorrelationStudy("x", 0.5, 4)


def test_dataset_rejects_kind_mixing():
    cont = ContinuousStudy("a", 5, 1.0, 1.0, 5, 1.0, 1.0)
    with pytest.raises(StudyValidationError):
        Dataset(kind="binary", studies=(cont,))


# --- screening flow ----------------------------------------------------------

FLOW = PrismaCounts(
    identified_db=6911,
    identified_other=3,
    after_dedup=3820,
    records_excluded=3801,
    fulltext_assessed=19,
    fulltext_excluded={
        "no comparison group": 1,
        "unclear crowding index": 8,
        "specific population only": 1,
        "systematic review only": 1,
    },
    included=8,
)


def test_summary_first_line_totals_identified():
    lines = prisma_summary(FLOW).splitlines()
    assert lines[0] == "Records identified: 6914 (database: 6911, other sources: 3)"


def test_summary_line_count_is_5_plus_reasons():
    assert len(prisma_summary(FLOW).splitlines()) == 5 + 4
    empty = PrismaCounts()
    assert len(prisma_summary(empty).splitlines()) == 5


def test_included_follows_fulltext_arithmetic():
    assert FLOW.included == 8
    lines = prisma_summary(FLOW).splitlines()
    assert lines[-1].endswith("8")


def test_all_zero_flow_is_valid():
    counts = PrismaCounts(identified_db=0)
    assert "Records identified: 0" in prisma_summary(counts)


def test_inconsistent_included_rejected():
    with pytest.raises(ConsistencyError) as err:
        PrismaCounts(fulltext_assessed=19, fulltext_excluded={"r": 11}, included=9)
    assert "included" in str(err.value)


def test_dedup_cannot_exceed_identified():
    with pytest.raises(ConsistencyError):
        PrismaCounts(identified_db=5, identified_other=0, after_dedup=6)


def test_negative_count_rejected():
    with pytest.raises(ConsistencyError):
        PrismaCounts(identified_db=-1)


def test_parse_counts_file_roundtrip():
    text = (
        "identified_db=6911\n"
        "identified_other=3\n"
        "after_dedup=3820\n"
        "records_excluded=3801\n"
        "fulltext_assessed=19\n"
        "excluded.no comparison group=1\n"
        "excluded.unclear crowding index=8\n"
        "excluded.specific population only=1\n"
        "excluded.systematic review only=1\n"
        "included=8\n"
    )
    assert parse_prisma_counts(text) == FLOW


def test_parse_counts_unknown_key():
    with pytest.raises(SchemaError):
        parse_prisma_counts("identified=2\n")
