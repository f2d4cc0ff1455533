"""Two-proportion inference on summary counts.

The central operation is the Pearson chi-square test on the 2x2 table of
conversions, with or without the Yates continuity correction, paired with
the unpooled Wald interval for the difference in rates.  This matches the
semantics of R's prop.test: the test statistic uses the pooled variance,
the interval uses the unpooled one, and with the correction enabled the
interval widens by min(0.5 * (1/n1 + 1/n2), |diff|).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from abstat.numerics import (
    LOG10_2,
    chi_square_sf_1df,
    log10_normal_sf,
    std_normal_quantile,
)

__all__ = [
    "ArmCount",
    "ExperimentSummary",
    "TestResult",
    "DegenerateTableError",
    "two_proportion_test",
    "counts_from_rate",
    "cohens_h",
]


class DegenerateTableError(ValueError):
    """The pooled conversion rate is 0 or 1, so the test statistic is undefined."""


@dataclass(frozen=True)
class ArmCount:
    """Visitors and conversions for one arm of an experiment."""

    n: int
    x: int

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or not isinstance(self.x, int):
            raise ValueError("arm counts must be integers")
        if self.n < 1:
            raise ValueError(f"arm size must be >= 1, got n={self.n}")
        if not 0 <= self.x <= self.n:
            raise ValueError(f"conversions must be in [0, n], got x={self.x}, n={self.n}")

    @property
    def rate(self) -> float:
        return self.x / self.n


@dataclass(frozen=True)
class ExperimentSummary:
    """A labeled control/treatment pair.

    reconstructed marks rows whose counts were rebuilt from rounded rates
    rather than reported directly; downstream consumers may widen
    tolerances for such rows.
    """

    label: str
    control: ArmCount
    treatment: ArmCount
    reconstructed: bool = False

    def __post_init__(self) -> None:
        if not self.label:
            raise ValueError("label must be non-empty")


@dataclass(frozen=True)
class TestResult:
    """Outcome of a two-proportion test.

    abs_diff is treatment minus control; rel_lift is abs_diff relative to
    the control rate (infinite when the control rate is zero).  log10_p
    duplicates p_value on the log scale so that extreme results stay
    representable; ci bounds are for the absolute difference.
    """

    rate_control: float
    rate_treatment: float
    abs_diff: float
    rel_lift: float
    se_unpooled: float
    chi2: float
    z_signed: float
    p_value: float
    log10_p: float
    ci_low: float
    ci_high: float
    continuity_used: bool


def two_proportion_test(
    control: ArmCount,
    treatment: ArmCount,
    alpha: float = 0.05,
    continuity: bool = True,
) -> TestResult:
    """Pearson chi-square test for two proportions with Wald interval.

    Args:
        control: counts for the control arm.
        treatment: counts for the treatment arm.
        alpha: two-sided level for the confidence interval.
        continuity: apply the Yates correction (|O - E| per cell shrunk
            by 0.5, floored at 0) and widen the interval accordingly.

    Raises:
        DegenerateTableError: all observations converted, or none did.
    """
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha!r}")
    n1, x1 = control.n, control.x
    n2, x2 = treatment.n, treatment.x
    pooled = (x1 + x2) / (n1 + n2)
    if pooled <= 0.0 or pooled >= 1.0:
        raise DegenerateTableError(
            f"pooled rate {pooled} leaves no variation to test against"
        )
    p1 = control.rate
    p2 = treatment.rate
    diff = p2 - p1

    observed = (x1, n1 - x1, x2, n2 - x2)
    expected = (n1 * pooled, n1 * (1.0 - pooled), n2 * pooled, n2 * (1.0 - pooled))
    chi2 = 0.0
    for o, e in zip(observed, expected):
        dev = abs(o - e)
        if continuity:
            dev = max(dev - 0.5, 0.0)
        chi2 += dev * dev / e

    z_abs = math.sqrt(chi2)
    z_signed = math.copysign(z_abs, diff)
    p_value = chi_square_sf_1df(chi2)
    log10_p = min(LOG10_2 + log10_normal_sf(z_abs), 0.0)

    se_unpooled = math.sqrt(p1 * (1.0 - p1) / n1 + p2 * (1.0 - p2) / n2)
    z_crit = std_normal_quantile(1.0 - alpha / 2.0)
    correction = min(0.5 * (1.0 / n1 + 1.0 / n2), abs(diff)) if continuity else 0.0
    half_width = z_crit * se_unpooled + correction

    if p1 > 0.0:
        rel_lift = diff / p1
    else:
        rel_lift = math.inf if diff > 0.0 else -math.inf

    return TestResult(
        rate_control=p1,
        rate_treatment=p2,
        abs_diff=diff,
        rel_lift=rel_lift,
        se_unpooled=se_unpooled,
        chi2=chi2,
        z_signed=z_signed,
        p_value=p_value,
        log10_p=log10_p,
        ci_low=diff - half_width,
        ci_high=diff + half_width,
        continuity_used=continuity,
    )


def counts_from_rate(n: int, rate: float) -> int:
    """Nearest-integer conversion count for a reported rate (ties to even)."""
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    rate = float(rate)
    if not (0.0 <= rate <= 1.0) or not math.isfinite(rate):
        raise ValueError(f"rate must be in [0, 1], got {rate!r}")
    return min(max(round(rate * n), 0), n)


def cohens_h(rate_a: float, rate_b: float) -> float:
    """Cohen's h effect size: difference of arcsine-transformed rates."""
    for name, value in (("rate_a", rate_a), ("rate_b", rate_b)):
        if not (0.0 <= float(value) <= 1.0) or not math.isfinite(float(value)):
            raise ValueError(f"{name} must be in [0, 1], got {value!r}")
    return 2.0 * math.asin(math.sqrt(rate_a)) - 2.0 * math.asin(math.sqrt(rate_b))
