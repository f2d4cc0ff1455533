"""Sample ratio mismatch check.

Randomization should split traffic at the configured share; a mismatch
invalidates downstream inference no matter how the metrics look.  The
observed control allocation is tested against Binomial(N, share) two
ways: an exact binomial tail (twice the smaller tail, capped at 1) and
the normal approximation.  Both are reported on the log10 scale because
real mismatches produce p-values like 1e-466 that no float can hold; the
exact value is preferred up to N = 1e6, the normal one beyond.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from abstat.numerics import LOG10_2, log10_normal_sf, log_binomial_sf

# Largest total N for which the exact binomial tail is the preferred channel.
EXACT_PREFERRED_LIMIT = 1_000_000

DEFAULT_THRESHOLD = 1e-4

__all__ = ["SrmResult", "srm_check", "EXACT_PREFERRED_LIMIT", "DEFAULT_THRESHOLD"]


@dataclass(frozen=True)
class SrmResult:
    """Outcome of a sample ratio mismatch check.

    log10_p_two_sided is the preferred channel (exact for small N, normal
    for large); both individual channels are always present.  verdict is
    "fail" when the preferred p falls below the configured threshold.
    """

    z: float
    log10_p_two_sided: float
    log10_p_exact: float
    log10_p_normal: float
    observed_share: float
    expected_share: float
    verdict: str


def srm_check(
    n_control: int,
    n_treatment: int,
    expected_control_share: float = 0.5,
    threshold: float = DEFAULT_THRESHOLD,
) -> SrmResult:
    """Test the observed allocation against the configured split.

    Args:
        n_control: visitors observed in control.
        n_treatment: visitors observed in treatment.
        expected_control_share: configured probability of assignment to
            control.
        threshold: p-value below which the verdict is "fail".
    """
    for name, value in (("n_control", n_control), ("n_treatment", n_treatment)):
        if not isinstance(value, int) or value < 0:
            raise ValueError(f"{name} must be a non-negative integer, got {value!r}")
    total = n_control + n_treatment
    if total < 1:
        raise ValueError("at least one visitor is required")
    q = float(expected_control_share)
    if not (0.0 < q < 1.0) or not math.isfinite(q):
        raise ValueError(f"expected_control_share must be in (0, 1), got {q!r}")
    threshold = float(threshold)
    if not (0.0 < threshold < 1.0):
        raise ValueError(f"threshold must be in (0, 1), got {threshold!r}")

    z = (n_control - total * q) / math.sqrt(total * q * (1.0 - q))
    log10_normal = min(LOG10_2 + log10_normal_sf(abs(z)), 0.0)

    # twice the smaller tail; the lower tail of X is the upper tail of N - X
    upper = log_binomial_sf(total, n_control, q)
    lower = log_binomial_sf(total, total - n_control, 1.0 - q)
    log10_exact = min(LOG10_2 + min(upper, lower), 0.0)

    preferred = log10_exact if total <= EXACT_PREFERRED_LIMIT else log10_normal
    verdict = "fail" if preferred < math.log10(threshold) else "pass"

    return SrmResult(
        z=z,
        log10_p_two_sided=preferred,
        log10_p_exact=log10_exact,
        log10_p_normal=log10_normal,
        observed_share=n_control / total,
        expected_share=q,
        verdict=verdict,
    )
