"""Power analysis and replication diagnostics for two-proportion designs.

All calculations run on the normal approximation with the standard error
taken under the null at the baseline rate:

    se = sqrt(p * (1 - p) * (1/n_control + 1/n_treatment))

The signal-to-noise ratio snr = (p * relative_mde) / se then drives power,
minimum detectable effects, the small-telescopes replication check, and
the winner's-curse diagnostics (expected exaggeration of significant
estimates, expected z at a given power, false positive risk).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from abstat.numerics import (
    std_normal_cdf,
    std_normal_pdf,
    std_normal_quantile,
)
from abstat.proportions import TestResult

TWO_SIDED = "two_sided"
RIGHT = "right"

__all__ = [
    "TWO_SIDED",
    "RIGHT",
    "DesignSpec",
    "PowerResult",
    "TelescopeResult",
    "ExpectedZ",
    "null_se",
    "power_two_proportions",
    "lehr_sample_size",
    "sample_size_two_proportions",
    "mde_from_power",
    "d33",
    "small_telescope_test",
    "exaggeration_ratio",
    "expected_z_at_power",
    "false_positive_risk",
]


def _check_rate(name: str, value: float) -> float:
    value = float(value)
    if not (0.0 < value < 1.0) or not math.isfinite(value):
        raise ValueError(f"{name} must be in (0, 1), got {value!r}")
    return value


def _check_arm(name: str, value: int) -> int:
    if not isinstance(value, int) or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return value


@dataclass(frozen=True)
class DesignSpec:
    """An experiment design to evaluate.

    alpha is the type I error of the chosen test: the full two-sided
    level when tail is "two_sided", or the one-sided level when tail is
    "right".  relative_mde is the minimum detectable effect as a fraction
    of the baseline rate.
    """

    baseline_rate: float
    relative_mde: float
    n_control: int
    n_treatment: int
    alpha: float = 0.05
    tail: str = TWO_SIDED

    def __post_init__(self) -> None:
        _check_rate("baseline_rate", self.baseline_rate)
        if not (self.relative_mde >= 0.0 and math.isfinite(self.relative_mde)):
            raise ValueError(f"relative_mde must be >= 0, got {self.relative_mde!r}")
        _check_arm("n_control", self.n_control)
        _check_arm("n_treatment", self.n_treatment)
        _check_rate("alpha", self.alpha)
        if self.tail not in (TWO_SIDED, RIGHT):
            raise ValueError(f"tail must be {TWO_SIDED!r} or {RIGHT!r}, got {self.tail!r}")

    @property
    def alpha_one_sided(self) -> float:
        return self.alpha / 2.0 if self.tail == TWO_SIDED else self.alpha


@dataclass(frozen=True)
class PowerResult:
    power: float
    snr: float
    se_null: float


@dataclass(frozen=True)
class TelescopeResult:
    """Small-telescopes verdict for one replication against an original design.

    original_too_small is true when even the upper confidence bound of the
    replication falls short of the effect the original design had 33%
    power to detect.
    """

    upper_bound: float
    threshold: float
    original_too_small: bool


@dataclass(frozen=True)
class ExpectedZ:
    z: float
    p_two_sided: float


def null_se(baseline_rate: float, n_control: int, n_treatment: int) -> float:
    """Standard error of the rate difference under the null at the baseline."""
    p = _check_rate("baseline_rate", baseline_rate)
    n1 = _check_arm("n_control", n_control)
    n2 = _check_arm("n_treatment", n_treatment)
    return math.sqrt(p * (1.0 - p) * (1.0 / n1 + 1.0 / n2))


def power_two_proportions(spec: DesignSpec) -> PowerResult:
    """Approximate power of the two-proportion z test for a design.

    The right-tail rejection probability is cdf(snr - z_crit); a
    two-sided design adds the opposite tail cdf(-snr - z_crit), which is
    negligible except near zero effect.
    """
    se = null_se(spec.baseline_rate, spec.n_control, spec.n_treatment)
    delta = spec.baseline_rate * spec.relative_mde
    snr = delta / se
    z_crit = std_normal_quantile(1.0 - spec.alpha_one_sided)
    power = std_normal_cdf(snr - z_crit)
    if spec.tail == TWO_SIDED:
        power += std_normal_cdf(-snr - z_crit)
    return PowerResult(power=power, snr=snr, se_null=se)


def lehr_sample_size(baseline_rate: float, relative_mde: float) -> int:
    """Lehr's rule of thumb: per-arm n = 16 * p * (1 - p) / delta^2.

    The constant 16 is the convention (80% power at two-sided 5%, with
    2 * (z_0.975 + z_0.8)^2 = 15.7 rounded up); for other operating
    points use sample_size_two_proportions.
    """
    p = _check_rate("baseline_rate", baseline_rate)
    relative_mde = float(relative_mde)
    if not (relative_mde > 0.0 and math.isfinite(relative_mde)):
        raise ValueError(f"relative_mde must be > 0, got {relative_mde!r}")
    delta = p * relative_mde
    return math.ceil(16.0 * p * (1.0 - p) / (delta * delta))


def sample_size_two_proportions(
    baseline_rate: float,
    relative_mde: float,
    alpha: float = 0.05,
    power: float = 0.80,
    tail: str = TWO_SIDED,
) -> int:
    """Per-arm sample size for the requested power, without Lehr's rounding."""
    p = _check_rate("baseline_rate", baseline_rate)
    relative_mde = float(relative_mde)
    if not (relative_mde > 0.0 and math.isfinite(relative_mde)):
        raise ValueError(f"relative_mde must be > 0, got {relative_mde!r}")
    _check_rate("alpha", alpha)
    _check_rate("power", power)
    if tail not in (TWO_SIDED, RIGHT):
        raise ValueError(f"tail must be {TWO_SIDED!r} or {RIGHT!r}, got {tail!r}")
    alpha_one_sided = alpha / 2.0 if tail == TWO_SIDED else alpha
    snr_star = std_normal_quantile(1.0 - alpha_one_sided) + std_normal_quantile(power)
    delta = p * relative_mde
    return math.ceil(2.0 * snr_star * snr_star * p * (1.0 - p) / (delta * delta))


def mde_from_power(
    baseline_rate: float,
    n_control: int,
    n_treatment: int,
    target_power: float,
    alpha_one_sided: float = 0.025,
) -> float:
    """Relative effect a design detects with the target right-tail power.

    Closed-form inversion of power_two_proportions for the right tail:
    snr* = z_crit + quantile(target_power), which approaches zero as the
    target approaches the type I error from above.
    """
    p = _check_rate("baseline_rate", baseline_rate)
    a = _check_rate("alpha_one_sided", alpha_one_sided)
    target_power = float(target_power)
    if not (a < target_power < 1.0):
        raise ValueError(
            f"target_power must be in ({a}, 1), got {target_power!r}"
        )
    se = null_se(p, n_control, n_treatment)
    snr_star = std_normal_quantile(1.0 - a) + std_normal_quantile(target_power)
    return snr_star * se / p


def d33(
    baseline_rate: float,
    n_control: int,
    n_treatment: int,
    alpha_one_sided: float = 0.025,
) -> float:
    """Absolute rate difference the design detects with 33% power.

    This is the small-telescopes benchmark: an effect smaller than d33
    is one the original experiment would most likely have missed.
    """
    p = _check_rate("baseline_rate", baseline_rate)
    return p * mde_from_power(p, n_control, n_treatment, 1.0 / 3.0, alpha_one_sided)


def small_telescope_test(
    replication: TestResult,
    d33_value: float,
    alpha_one_sided: float = 0.025,
) -> TelescopeResult:
    """Compare a replication's upper confidence bound against d33.

    The replication effect is judged on the absolute scale: its one-sided
    upper bound abs_diff + z * se_unpooled must reach d33_value for the
    original design to remain credible.
    """
    a = _check_rate("alpha_one_sided", alpha_one_sided)
    d33_value = float(d33_value)
    if not (d33_value > 0.0 and math.isfinite(d33_value)):
        raise ValueError(f"d33_value must be > 0, got {d33_value!r}")
    upper = replication.abs_diff + std_normal_quantile(1.0 - a) * replication.se_unpooled
    return TelescopeResult(
        upper_bound=upper,
        threshold=d33_value,
        original_too_small=upper < d33_value,
    )


def exaggeration_ratio(snr: float, alpha_one_sided: float = 0.025) -> float:
    """Expected overestimation factor of significant positive estimates.

    For an estimator distributed N(delta, se^2), conditioning on clearing
    the significance threshold gives a truncated-normal mean:

        E[est | est > z_crit * se] / delta = 1 + (pdf(a) / cdf(-a)) / snr

    with a = z_crit - snr.  At low power this is large: snr ~ 0.08 puts
    it near 28.
    """
    snr = float(snr)
    if not (snr > 0.0 and math.isfinite(snr)):
        raise ValueError(f"snr must be > 0, got {snr!r}")
    a_crit = std_normal_quantile(1.0 - _check_rate("alpha_one_sided", alpha_one_sided))
    a = a_crit - snr
    return 1.0 + std_normal_pdf(a) / std_normal_cdf(-a) / snr


def expected_z_at_power(power: float, alpha_one_sided: float = 0.025) -> ExpectedZ:
    """The z score a study is designed around, and its two-sided p.

    A design with the given right-tail power centers its estimator at
    z = z_crit + quantile(power); at 80% power and one-sided 2.5% this is
    z = 2.80, i.e. p = 0.005.
    """
    a = _check_rate("alpha_one_sided", alpha_one_sided)
    power = _check_rate("power", power)
    z = std_normal_quantile(1.0 - a) + std_normal_quantile(power)
    p = 2.0 * std_normal_cdf(-abs(z))
    return ExpectedZ(z=z, p_two_sided=p)


def false_positive_risk(
    alpha_one_sided: float,
    power: float,
    prior_true_share: float,
) -> float:
    """Share of significant results that are false, given a base rate.

    Bayes over a population of experiments where prior_true_share of
    tested effects are real:

        fpr = alpha * (1 - pi) / (alpha * (1 - pi) + power * pi)
    """
    a = _check_rate("alpha_one_sided", alpha_one_sided)
    power = _check_rate("power", power)
    pi = _check_rate("prior_true_share", prior_true_share)
    false_pos = a * (1.0 - pi)
    return false_pos / (false_pos + power * pi)
