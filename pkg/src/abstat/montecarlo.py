"""Deterministic Monte Carlo oracle for the two-proportion pipeline.

Replicates are processed in fixed chunks of 8192; chunk i draws from its
own counter-based stream Philox(SeedSequence(seed, spawn_key=(i,))), so
results are a pure function of the configuration no matter how chunks
are scheduled across workers.  Within a chunk the control arm is always
drawn before the treatment arm.  numpy's binomial sampler is the exact
one (inversion when n*p is small, a BTPE-class rejection method beyond),
not a normal approximation, which is what makes the empirical answers
usable as an oracle for the analytic formulas.

Each replicate is scored exactly as two_proportion_test (uncorrected)
would score it: pooled-variance z statistic, unpooled Wald interval at
level 1 - 2 * alpha_one_sided.  Significant means strictly exceeding the
critical value.  Means over replicates use exactly-rounded summation, so
aggregation order cannot change the result.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from abstat.numerics import std_normal_quantile

CHUNK = 8192  # part of the stream layout; changing it changes the draws

__all__ = ["SimConfig", "SimResult", "simulate", "CHUNK"]


@dataclass(frozen=True)
class SimConfig:
    """A simulated experiment: true rates, arm sizes, and replication plan.

    The treatment converts at baseline_rate * (1 + true_rel_lift).
    alpha_one_sided is the right-tail significance level; the coverage
    check uses the matching two-sided interval.
    """

    n_control: int
    n_treatment: int
    baseline_rate: float
    true_rel_lift: float
    replicates: int
    seed: int
    alpha_one_sided: float = 0.025

    def __post_init__(self) -> None:
        for name in ("n_control", "n_treatment"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        if not (0.0 < self.baseline_rate < 1.0):
            raise ValueError(f"baseline_rate must be in (0, 1), got {self.baseline_rate!r}")
        if not math.isfinite(self.true_rel_lift):
            raise ValueError(f"true_rel_lift must be finite, got {self.true_rel_lift!r}")
        rate_t = self.baseline_rate * (1.0 + self.true_rel_lift)
        if not (0.0 <= rate_t <= 1.0):
            raise ValueError(
                f"treatment rate {rate_t} implied by the lift is outside [0, 1]"
            )
        if not isinstance(self.replicates, int) or self.replicates < 1:
            raise ValueError(f"replicates must be a positive integer, got {self.replicates!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ValueError(f"seed must be a non-negative integer, got {self.seed!r}")
        if not (0.0 < self.alpha_one_sided < 0.5):
            raise ValueError(
                f"alpha_one_sided must be in (0, 0.5), got {self.alpha_one_sided!r}"
            )

    @property
    def treatment_rate(self) -> float:
        return self.baseline_rate * (1.0 + self.true_rel_lift)

    @property
    def true_abs_diff(self) -> float:
        return self.baseline_rate * self.true_rel_lift


@dataclass(frozen=True)
class SimResult:
    """Aggregates over replicates.

    empirical_exaggeration is mean_significant_estimate divided by the
    true absolute effect; it is reported as 0.0 when the true effect is
    not positive or nothing was significant.  sign_error_rate is the
    share of two-sided-significant replicates whose estimate has the
    wrong sign.
    """

    empirical_power_right_tail: float
    mean_significant_estimate: float
    empirical_exaggeration: float
    sign_error_rate: float
    ci_coverage: float


def _chunk_counts(config: SimConfig, chunk_index: int) -> tuple[np.ndarray, np.ndarray]:
    """Binomial draws for one chunk, from its private stream."""
    start = chunk_index * CHUNK
    size = min(CHUNK, config.replicates - start)
    ss = np.random.SeedSequence(entropy=config.seed, spawn_key=(chunk_index,))
    rng = np.random.Generator(np.random.Philox(ss))
    xc = rng.binomial(config.n_control, config.baseline_rate, size=size)
    xt = rng.binomial(config.n_treatment, config.treatment_rate, size=size)
    return xc, xt


def _tally(
    config: SimConfig, xc: np.ndarray, xt: np.ndarray, z_crit: float
) -> tuple[int, int, int, int, np.ndarray]:
    """Score one chunk of tables the way two_proportion_test would."""
    n1, n2 = config.n_control, config.n_treatment
    inv_n = 1.0 / n1 + 1.0 / n2
    r1 = xc / n1
    r2 = xt / n2
    diff = r2 - r1
    pooled = (xc + xt) / (n1 + n2)
    var_pooled = pooled * (1.0 - pooled) * inv_n
    # degenerate tables (pooled 0 or 1) have diff 0; score them as z = 0
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(var_pooled > 0.0, diff / np.sqrt(var_pooled), 0.0)
    se_unpooled = np.sqrt(r1 * (1.0 - r1) / n1 + r2 * (1.0 - r2) / n2)

    sig_right = z > z_crit
    sig_two = np.abs(z) > z_crit
    delta = config.true_abs_diff
    if delta != 0.0:
        sign_err = int((sig_two & (np.sign(diff) != np.sign(delta))).sum())
    else:
        sign_err = 0
    covered = int((np.abs(diff - delta) <= z_crit * se_unpooled).sum())
    return (
        int(sig_right.sum()),
        int(sig_two.sum()),
        sign_err,
        covered,
        diff[sig_right],
    )


def simulate(config: SimConfig, n_jobs: int = 1) -> SimResult:
    """Run the replication plan and aggregate.

    Args:
        config: the simulated experiment.
        n_jobs: worker threads for chunk processing; the result is
            bit-identical for any value.
    """
    if not isinstance(n_jobs, int) or n_jobs < 1:
        raise ValueError(f"n_jobs must be a positive integer, got {n_jobs!r}")
    z_crit = std_normal_quantile(1.0 - config.alpha_one_sided)
    n_chunks = (config.replicates + CHUNK - 1) // CHUNK

    def work(index: int) -> tuple[int, int, int, int, np.ndarray]:
        xc, xt = _chunk_counts(config, index)
        return _tally(config, xc, xt, z_crit)

    if n_jobs == 1 or n_chunks == 1:
        partials = [work(i) for i in range(n_chunks)]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            partials = list(pool.map(work, range(n_chunks)))

    n_sig_right = sum(p[0] for p in partials)
    n_sig_two = sum(p[1] for p in partials)
    n_sign_err = sum(p[2] for p in partials)
    n_covered = sum(p[3] for p in partials)
    # fsum is exactly rounded, so the mean does not depend on chunk order
    sig_total = math.fsum(
        v for p in partials for v in p[4].tolist()
    )

    mean_sig = sig_total / n_sig_right if n_sig_right else 0.0
    delta = config.true_abs_diff
    exaggeration = mean_sig / delta if (delta > 0.0 and n_sig_right) else 0.0
    return SimResult(
        empirical_power_right_tail=n_sig_right / config.replicates,
        mean_significant_estimate=mean_sig,
        empirical_exaggeration=exaggeration,
        sign_error_rate=n_sign_err / n_sig_two if n_sig_two else 0.0,
        ci_coverage=n_covered / config.replicates,
    )
