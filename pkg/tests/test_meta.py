"""Inverse-variance pooling of independent replications."""

from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from abstat.meta import SharedControlError, fixed_effect_meta
from abstat.proportions import ArmCount, ExperimentSummary

from golden_data import REPLICATIONS, reconstruct


def _replication_studies():
    return [reconstruct(label) for label in REPLICATIONS]


def test_pooled_replications_reference():
    result = fixed_effect_meta(_replication_studies())
    assert result.combined_rel_lift == pytest.approx(0.0020823824, rel=1e-6)
    assert result.combined_se_log == pytest.approx(0.0011674779, rel=1e-6)
    assert result.z == pytest.approx(1.7818043, rel=1e-6)
    assert result.p_value == pytest.approx(0.074781146, rel=1e-6)
    shares = [s.weight_share for s in result.per_study]
    assert shares == pytest.approx([0.8810, 0.0441, 0.0749], abs=5e-5)
    assert [s.label for s in result.per_study] == list(REPLICATIONS)


def test_weight_shares_sum_to_one():
    result = fixed_effect_meta(_replication_studies())
    assert sum(s.weight_share for s in result.per_study) == pytest.approx(1.0, abs=1e-12)


def test_equal_studies_pool_to_themselves():
    study = ExperimentSummary("a", ArmCount(1000, 100), ArmCount(1000, 120))
    twin = ExperimentSummary("b", ArmCount(1001, 100), ArmCount(1000, 120))
    result = fixed_effect_meta([study, twin])
    single = fixed_effect_meta([study])
    assert result.combined_rel_lift == pytest.approx(single.combined_rel_lift, rel=5e-3)
    assert result.combined_se_log == pytest.approx(single.combined_se_log / 2**0.5, rel=2e-3)


def test_shared_control_rejected():
    first = ExperimentSummary("obsbygg", ArmCount(1000, 100), ArmCount(1000, 105))
    second = ExperimentSummary("obsbygg (sr)", ArmCount(1000, 100), ArmCount(998, 102))
    with pytest.raises(SharedControlError) as exc:
        fixed_effect_meta([first, second])
    assert "obsbygg" in str(exc.value)
    assert "obsbygg (sr)" in str(exc.value)


def test_zero_conversion_arm_rejected():
    bad = ExperimentSummary("empty", ArmCount(1000, 0), ArmCount(1000, 10))
    with pytest.raises(ValueError, match="zero conversions"):
        fixed_effect_meta([reconstruct("seaworld"), bad])


def test_no_studies_rejected():
    with pytest.raises(ValueError):
        fixed_effect_meta([])


@st.composite
def study_lists(draw):
    arms = draw(
        st.lists(
            st.tuples(
                st.integers(min_value=10, max_value=1_000_000),
                st.integers(min_value=10, max_value=1_000_000),
            ),
            min_size=2,
            max_size=8,
            unique_by=lambda t: t[0],
        )
    )
    studies = []
    for i, (n_control, n_treatment) in enumerate(arms):
        x_control = draw(st.integers(min_value=1, max_value=n_control - 1))
        x_treatment = draw(st.integers(min_value=1, max_value=n_treatment - 1))
        studies.append(
            ExperimentSummary(
                f"s{i}", ArmCount(n_control, x_control), ArmCount(n_treatment, x_treatment)
            )
        )
    return studies


@given(st.data(), study_lists())
def test_order_invariance(data, studies):
    shuffled = data.draw(st.permutations(studies))
    a = fixed_effect_meta(studies)
    b = fixed_effect_meta(shuffled)
    # fsum makes the pooled numbers exactly order-free
    assert a.combined_rel_lift == b.combined_rel_lift
    assert a.combined_se_log == b.combined_se_log
    assert a.z == b.z and a.p_value == b.p_value
    by_label = {s.label: s for s in b.per_study}
    for s in a.per_study:
        assert by_label[s.label] == s
