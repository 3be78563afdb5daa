import pytest

import oracles
from metakit.effects import EffectEstimate
from metakit.errors import InsufficientStudiesError
from metakit.pooling import pool, pool_fixed
from metakit.sensitivity import leave_one_out, robustness_verdict


def eff(study_id, value, variance):
    return EffectEstimate(study_id, "MD", value, variance, 10)


def make(values, variances=None):
    variances = variances or [1.0] * len(values)
    return [eff(f"s{i}", v, var) for i, (v, var) in enumerate(zip(values, variances))]


def test_five_studies_give_five_rows_in_input_order():
    rows = leave_one_out(make([0.2, 0.5, 0.1, 0.9, 0.4]), "random")
    assert [r.omitted_study_id for r in rows] == ["s0", "s1", "s2", "s3", "s4"]
    assert all(r.result.k == 4 for r in rows)


def test_identical_studies_are_fully_robust():
    effects = make([5.0] * 4, [0.5] * 4)
    rows = leave_one_out(effects, "fixed")
    for row in rows:
        assert row.result.estimate == pytest.approx(5.0, abs=1e-12)
        assert not row.sign_flip
    verdict = robustness_verdict(rows, pool_fixed(effects))
    assert verdict.robust
    assert verdict.flagged == ()


def test_outlier_omission_hand_value():
    effects = make([0.0, 0.0, 10.0])
    rows = leave_one_out(effects, "fixed")
    assert rows[2].result.estimate == 0.0
    # every row equals brute-force pooling of the explicit 2-subset
    want = oracles.leave_one_out_means([0.0, 0.0, 10.0], [1.0] * 3, "fixed")
    for row, expected in zip(rows, want):
        assert row.result.estimate == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("model", ["fixed", "random"])
def test_rows_match_subset_oracle(model):
    values = [0.3, -0.2, 1.4, 0.8, -0.6, 0.05]
    variances = [0.5, 1.2, 0.8, 0.3, 2.0, 0.9]
    rows = leave_one_out(make(values, variances), model)
    want = oracles.leave_one_out_means(values, variances, model)
    assert len(rows) == len(values)
    for row, expected in zip(rows, want):
        assert row.result.estimate == pytest.approx(expected, abs=1e-12)


def test_omitting_study_at_the_pooled_mean_keeps_fixed_estimate():
    effects = [eff("a", 1.0, 1.0), eff("b", 3.0, 1.0), eff("mid", 2.0, 5.0)]
    full = pool_fixed(effects)
    assert full.estimate == pytest.approx(2.0, abs=1e-12)
    rows = leave_one_out(effects, "fixed")
    assert rows[2].result.estimate == pytest.approx(full.estimate, abs=1e-12)


def test_sign_flip_detected_and_flagged():
    # s2 carries the significance: without it the CI crosses zero
    effects = [eff("s0", 0.1, 1.0), eff("s1", 0.2, 1.0), eff("s2", 3.0, 0.01)]
    full = pool(effects, "fixed")
    assert full.significant()
    rows = leave_one_out(effects, "fixed")
    flips = [r.omitted_study_id for r in rows if r.sign_flip]
    assert flips == ["s2"]
    verdict = robustness_verdict(rows, full)
    assert not verdict.robust
    assert "s2" in verdict.flagged


def test_needs_three_studies():
    with pytest.raises(InsufficientStudiesError):
        leave_one_out(make([0.1, 0.2]), "fixed")
