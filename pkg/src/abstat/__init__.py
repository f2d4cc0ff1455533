"""Statistical toolkit for trustworthy A/B test analysis.

Covers the full lifecycle of an online experiment: planning (power,
sample size, minimum detectable effects), validity guardrails (sample
ratio mismatch), inference on conversion counts (two-proportion
chi-square tests with and without continuity correction), pooling of
replications (fixed-effect meta-analysis), replication evaluation
(small telescopes), and honest effect-size expectations under low power
(exaggeration ratios, false positive risk, simulation).
"""

from abstat.ingest import (
    COUNT_COLUMNS,
    RATE_COLUMNS,
    RowError,
    SchemaError,
    parse_experiments,
    parse_experiments_text,
)
from abstat.meta import (
    SHARED_CONTROL_MARKER,
    MetaResult,
    MetaStudy,
    SharedControlError,
    fixed_effect_meta,
)
from abstat.montecarlo import SimConfig, SimResult, simulate
from abstat.numerics import (
    chi_square_sf_1df,
    log10_normal_sf,
    log_binomial_sf,
    std_normal_cdf,
    std_normal_pdf,
    std_normal_quantile,
)
from abstat.power import (
    RIGHT,
    TWO_SIDED,
    DesignSpec,
    ExpectedZ,
    PowerResult,
    TelescopeResult,
    d33,
    exaggeration_ratio,
    expected_z_at_power,
    false_positive_risk,
    lehr_sample_size,
    mde_from_power,
    null_se,
    power_two_proportions,
    sample_size_two_proportions,
    small_telescope_test,
)
from abstat.proportions import (
    ArmCount,
    DegenerateTableError,
    ExperimentSummary,
    TestResult,
    cohens_h,
    counts_from_rate,
    two_proportion_test,
)
from abstat.report import (
    ExperimentReport,
    MetaExclusion,
    Report,
    TelescopeBlock,
    TelescopeEntry,
    emit_json,
    parse_json,
    render_chart,
    render_text,
    run_report,
)
from abstat.srm import DEFAULT_THRESHOLD, EXACT_PREFERRED_LIMIT, SrmResult, srm_check

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # ingest
    "COUNT_COLUMNS",
    "RATE_COLUMNS",
    "SchemaError",
    "RowError",
    "parse_experiments",
    "parse_experiments_text",
    # proportions
    "ArmCount",
    "ExperimentSummary",
    "TestResult",
    "DegenerateTableError",
    "two_proportion_test",
    "counts_from_rate",
    "cohens_h",
    # numerics
    "std_normal_cdf",
    "std_normal_pdf",
    "std_normal_quantile",
    "log10_normal_sf",
    "chi_square_sf_1df",
    "log_binomial_sf",
    # power and replication
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
    # srm
    "SrmResult",
    "srm_check",
    "DEFAULT_THRESHOLD",
    "EXACT_PREFERRED_LIMIT",
    # meta
    "MetaStudy",
    "MetaResult",
    "SharedControlError",
    "SHARED_CONTROL_MARKER",
    "fixed_effect_meta",
    # monte carlo
    "SimConfig",
    "SimResult",
    "simulate",
    # report
    "ExperimentReport",
    "TelescopeEntry",
    "TelescopeBlock",
    "MetaExclusion",
    "Report",
    "run_report",
    "render_text",
    "render_chart",
    "emit_json",
    "parse_json",
]
