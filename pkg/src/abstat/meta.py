"""Fixed-effect meta-analysis of conversion experiments.

Studies are combined on the log relative risk scale with inverse-variance
weights; the delta-method variance of each study's log rate ratio is

    var = (1 - p_c) / (n_c * p_c) + (1 - p_t) / (n_t * p_t)

Only independent studies may be pooled: two rows that reuse the same
control arm would double-count its visitors, so identical control counts
are rejected outright.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from abstat.numerics import chi_square_sf_1df
from abstat.proportions import ExperimentSummary

__all__ = ["MetaStudy", "MetaResult", "SharedControlError", "fixed_effect_meta"]

# Rows carrying this marker in their label are secondary treatments measured
# against a control that another row already owns.
SHARED_CONTROL_MARKER = "(sr)"


class SharedControlError(ValueError):
    """Two studies share a control arm and cannot be pooled as independent."""


@dataclass(frozen=True)
class MetaStudy:
    label: str
    log_rr: float
    se_log: float
    weight: float
    weight_share: float


@dataclass(frozen=True)
class MetaResult:
    """Fixed-effect combination of several studies.

    combined_rel_lift is the pooled log relative risk mapped back to a
    relative lift (exp - 1); combined_se_log stays on the log scale.
    """

    combined_rel_lift: float
    combined_se_log: float
    z: float
    p_value: float
    per_study: tuple[MetaStudy, ...]


def fixed_effect_meta(studies: Sequence[ExperimentSummary]) -> MetaResult:
    """Pool independent studies with inverse-variance weights.

    Args:
        studies: experiment summaries; every arm needs at least one
            conversion for the log relative risk to exist.

    Raises:
        SharedControlError: two studies have byte-identical control
            counts, the signature of a shared control arm.
        ValueError: a study has a zero-conversion arm, or no studies.
    """
    if not studies:
        raise ValueError("at least one study is required")

    seen: dict[tuple[int, int], str] = {}
    for s in studies:
        key = (s.control.n, s.control.x)
        if key in seen:
            raise SharedControlError(
                f"studies {seen[key]!r} and {s.label!r} share a control arm "
                f"(n={key[0]}, x={key[1]}); pool only independent studies"
            )
        seen[key] = s.label

    weights: list[float] = []
    log_rrs: list[float] = []
    for s in studies:
        for arm_name, arm in (("control", s.control), ("treatment", s.treatment)):
            if arm.x < 1:
                raise ValueError(
                    f"study {s.label!r} has zero conversions in {arm_name}; "
                    "log relative risk is undefined"
                )
        pc, pt = s.control.rate, s.treatment.rate
        var = (1.0 - pc) / (s.control.n * pc) + (1.0 - pt) / (s.treatment.n * pt)
        if var <= 0.0:
            raise ValueError(f"study {s.label!r} has zero variance")
        log_rrs.append(math.log(pt / pc))
        weights.append(1.0 / var)

    total_weight = math.fsum(weights)
    combined = math.fsum(w * lr for w, lr in zip(weights, log_rrs)) / total_weight
    se = 1.0 / math.sqrt(total_weight)
    z = combined / se
    p_value = chi_square_sf_1df(z * z)

    per_study = tuple(
        MetaStudy(
            label=s.label,
            log_rr=lr,
            se_log=1.0 / math.sqrt(w),
            weight=w,
            weight_share=w / total_weight,
        )
        for s, lr, w in zip(studies, log_rrs, weights)
    )
    return MetaResult(
        combined_rel_lift=math.expm1(combined),
        combined_se_log=se,
        z=z,
        p_value=p_value,
        per_study=per_study,
    )
