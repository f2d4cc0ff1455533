"""Experiment report assembly, text/JSON rendering, and charting.

run_report ties the pipeline together for a set of experiment summaries:
per-experiment tests under both continuity settings, an allocation check
per experiment, a fixed-effect meta-analysis over the independent
replications, and small-telescopes verdicts against a designated
original study.

Rendering rules shared by the text and machine formats:

* lifts and rates are percentages with two decimals
* p-values carry two significant digits
* p-values below 1e-15 are shown on the log scale as 10^x
* the JSON form round-trips: parse_json(emit_json(x)) == x
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Sequence, Union

from abstat.meta import (
    SHARED_CONTROL_MARKER,
    MetaResult,
    MetaStudy,
    fixed_effect_meta,
)
from abstat.montecarlo import SimConfig, SimResult
from abstat.power import (
    ExpectedZ,
    PowerResult,
    TelescopeResult,
    d33,
    small_telescope_test,
)
from abstat.proportions import ArmCount, ExperimentSummary, TestResult, two_proportion_test
from abstat.srm import DEFAULT_THRESHOLD, SrmResult, srm_check

__all__ = [
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
    "format_p",
    "format_pct",
]


# ---------------------------------------------------------------------------
# document model


@dataclass(frozen=True)
class ExperimentReport:
    summary: ExperimentSummary
    uncorrected: TestResult
    corrected: TestResult
    srm: SrmResult


@dataclass(frozen=True)
class TelescopeEntry:
    label: str
    abs_diff: float
    upper_bound: float
    original_too_small: bool


@dataclass(frozen=True)
class TelescopeBlock:
    original_label: str
    d33_absolute: float
    alpha_one_sided: float
    entries: tuple[TelescopeEntry, ...]


@dataclass(frozen=True)
class MetaExclusion:
    label: str
    reason: str  # "shared_control" | "zero_conversions" | "original"


@dataclass(frozen=True)
class Report:
    alpha: float
    srm_threshold: float
    expected_control_share: float
    experiments: tuple[ExperimentReport, ...]
    meta: Union[MetaResult, None]
    meta_excluded: tuple[MetaExclusion, ...]
    telescope: Union[TelescopeBlock, None]


# ---------------------------------------------------------------------------
# pipeline


def _meta_candidates(
    experiments: Sequence[ExperimentSummary],
    original: Union[str, None],
) -> tuple[list[ExperimentSummary], list[MetaExclusion]]:
    """Drop the original, shared-control duplicates, and unpoolable rows."""
    excluded: list[MetaExclusion] = []
    candidates = []
    for s in experiments:
        if original is not None and s.label == original:
            excluded.append(MetaExclusion(s.label, "original"))
        else:
            candidates.append(s)

    by_control: dict[tuple[int, int], list[ExperimentSummary]] = {}
    for s in candidates:
        by_control.setdefault((s.control.n, s.control.x), []).append(s)
    kept: list[ExperimentSummary] = []
    dropped: set[str] = set()
    for group in by_control.values():
        if len(group) == 1:
            continue
        # keep the row without the shared-control marker; first one on a tie
        unmarked = [s for s in group if SHARED_CONTROL_MARKER not in s.label.lower()]
        keep = (unmarked or group)[0]
        for s in group:
            if s is not keep:
                dropped.add(s.label)
                excluded.append(MetaExclusion(s.label, "shared_control"))
    for s in candidates:
        if s.label in dropped:
            continue
        if s.control.x < 1 or s.treatment.x < 1:
            excluded.append(MetaExclusion(s.label, "zero_conversions"))
            continue
        kept.append(s)
    return kept, excluded


def run_report(
    experiments: Sequence[ExperimentSummary],
    alpha: float = 0.05,
    original: Union[str, None] = None,
    srm_threshold: float = DEFAULT_THRESHOLD,
    expected_control_share: float = 0.5,
) -> Report:
    """Assemble the full report document for a set of experiments.

    Args:
        experiments: parsed summaries, in display order.
        alpha: two-sided level used for tests, intervals, and the
            telescope check (whose one-sided level is alpha / 2).
        original: label of the study whose design anchors the
            small-telescopes comparison; None skips that block.
        srm_threshold: allocation p-value below which an experiment is
            flagged.
        expected_control_share: configured traffic share of control.
    """
    if not experiments:
        raise ValueError("at least one experiment is required")
    labels = [s.label for s in experiments]
    if original is not None and original not in labels:
        raise ValueError(f"original {original!r} not among labels {labels}")

    per_experiment = tuple(
        ExperimentReport(
            summary=s,
            uncorrected=two_proportion_test(s.control, s.treatment, alpha, continuity=False),
            corrected=two_proportion_test(s.control, s.treatment, alpha, continuity=True),
            srm=srm_check(s.control.n, s.treatment.n, expected_control_share, srm_threshold),
        )
        for s in experiments
    )

    candidates, excluded = _meta_candidates(experiments, original)
    meta = fixed_effect_meta(candidates) if len(candidates) >= 2 else None

    telescope = None
    if original is not None:
        original_summary = experiments[labels.index(original)]
        alpha_one_sided = alpha / 2.0
        benchmark = d33(
            original_summary.control.rate,
            original_summary.control.n,
            original_summary.treatment.n,
            alpha_one_sided,
        )
        entries = []
        for rep in per_experiment:
            if rep.summary.label == original:
                continue
            verdict: TelescopeResult = small_telescope_test(
                rep.uncorrected, benchmark, alpha_one_sided
            )
            entries.append(
                TelescopeEntry(
                    label=rep.summary.label,
                    abs_diff=rep.uncorrected.abs_diff,
                    upper_bound=verdict.upper_bound,
                    original_too_small=verdict.original_too_small,
                )
            )
        telescope = TelescopeBlock(
            original_label=original,
            d33_absolute=benchmark,
            alpha_one_sided=alpha_one_sided,
            entries=tuple(entries),
        )

    return Report(
        alpha=alpha,
        srm_threshold=srm_threshold,
        expected_control_share=expected_control_share,
        experiments=per_experiment,
        meta=meta,
        meta_excluded=tuple(excluded),
        telescope=telescope,
    )


# ---------------------------------------------------------------------------
# formatting


def format_pct(value: float, decimals: int = 2) -> str:
    """A fraction as a percentage string."""
    return f"{value * 100.0:.{decimals}f}%"


def format_p(p_value: float, log10_p: Union[float, None] = None) -> str:
    """A p-value with two significant digits, or 10^x when below 1e-15."""
    if log10_p is None:
        log10_p = math.log10(p_value) if p_value > 0.0 else -math.inf
    if p_value < 1e-15:
        return f"10^{log10_p:.1f}"
    return f"{p_value:.2g}"


def _p_from_log10(log10_p: float) -> float:
    return 10.0 ** log10_p if log10_p > -300.0 else 0.0


def _format_srm(srm: SrmResult) -> str:
    p_text = format_p(_p_from_log10(srm.log10_p_two_sided), srm.log10_p_two_sided)
    return (
        f"srm: z={srm.z:.2f} p={p_text} "
        f"observed_share={format_pct(srm.observed_share)} "
        f"expected={format_pct(srm.expected_share)} verdict={srm.verdict}"
    )


def _format_test_line(tag: str, r: TestResult) -> str:
    return (
        f"  {tag}: chi2={r.chi2:.4f} p={format_p(r.p_value, r.log10_p)} "
        f"ci=[{format_pct(r.ci_low)}, {format_pct(r.ci_high)}]"
    )


def render_text(report: Report) -> str:
    """Human-readable rendering; numbers match the JSON to printed precision."""
    lines: list[str] = []
    lines.append(f"experiment tests (alpha={report.alpha:g})")
    for exp in report.experiments:
        s = exp.summary
        u = exp.uncorrected
        flag = " [counts reconstructed from rates]" if s.reconstructed else ""
        lines.append(
            f"{s.label}: control {s.control.x}/{s.control.n} ({format_pct(u.rate_control)}), "
            f"treatment {s.treatment.x}/{s.treatment.n} ({format_pct(u.rate_treatment)}), "
            f"abs diff {format_pct(u.abs_diff)}, rel lift {format_pct(u.rel_lift)}{flag}"
        )
        lines.append(_format_test_line("chi-square", u))
        lines.append(_format_test_line("chi-square (yates)", exp.corrected))
        lines.append(f"  {_format_srm(exp.srm)}")

    if report.meta is not None:
        m = report.meta
        lines.append("")
        lines.append("meta-analysis (fixed effect, log relative risk)")
        lines.append(
            f"combined rel lift {format_pct(m.combined_rel_lift)}, "
            f"se(log rr)={m.combined_se_log:.6f}, z={m.z:.2f}, p={format_p(m.p_value)}"
        )
        for study in m.per_study:
            lines.append(
                f"  {study.label}: log rr={study.log_rr:.6f} "
                f"weight share={format_pct(study.weight_share)}"
            )
    if report.meta_excluded:
        reasons = ", ".join(f"{e.label} [{e.reason}]" for e in report.meta_excluded)
        lines.append(f"excluded from meta: {reasons}")

    if report.telescope is not None:
        t = report.telescope
        lines.append("")
        lines.append(f"small telescopes vs original {t.original_label!r}")
        lines.append(
            f"d33 (absolute diff detectable with 33% power): {format_pct(t.d33_absolute, 3)}"
        )
        for e in t.entries:
            lines.append(
                f"  {e.label}: diff {format_pct(e.abs_diff, 3)}, "
                f"upper bound {format_pct(e.upper_bound, 3)}, "
                f"original_too_small={'yes' if e.original_too_small else 'no'}"
            )

    failures = [e.summary.label for e in report.experiments if e.srm.verdict == "fail"]
    if failures:
        lines.append("")
        lines.append(
            f"warning: sample ratio mismatch for {', '.join(failures)}; "
            "inference on these experiments is not trustworthy"
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# machine format


_RESULT_KINDS = {
    "arm_count": ArmCount,
    "experiment_summary": ExperimentSummary,
    "test_result": TestResult,
    "srm_result": SrmResult,
    "power_result": PowerResult,
    "expected_z": ExpectedZ,
    "telescope_result": TelescopeResult,
    "meta_study": MetaStudy,
    "meta_result": MetaResult,
    "sim_config": SimConfig,
    "sim_result": SimResult,
    "experiment_report": ExperimentReport,
    "telescope_entry": TelescopeEntry,
    "telescope_block": TelescopeBlock,
    "meta_exclusion": MetaExclusion,
    "report": Report,
}
_KIND_BY_TYPE = {cls: kind for kind, cls in _RESULT_KINDS.items()}


def emit_json(obj: object, indent: Union[int, None] = 2) -> str:
    """Serialize a result object to its stable keyed JSON document."""
    kind = _KIND_BY_TYPE.get(type(obj))
    if kind is None:
        raise TypeError(f"cannot emit {type(obj).__name__}")
    return json.dumps(
        {"kind": kind, "data": asdict(obj)}, indent=indent, sort_keys=True
    )


def _build(cls, data):
    if data is None:
        return None
    kwargs = {}
    for f in fields(cls):
        value = data[f.name]
        builder = _NESTED.get((cls, f.name))
        kwargs[f.name] = builder(value) if builder else value
    return cls(**kwargs)


def _tuple_of(cls):
    return lambda items: tuple(_build(cls, item) for item in items)


_NESTED = {
    (ExperimentSummary, "control"): lambda d: _build(ArmCount, d),
    (ExperimentSummary, "treatment"): lambda d: _build(ArmCount, d),
    (MetaResult, "per_study"): _tuple_of(MetaStudy),
    (ExperimentReport, "summary"): lambda d: _build(ExperimentSummary, d),
    (ExperimentReport, "uncorrected"): lambda d: _build(TestResult, d),
    (ExperimentReport, "corrected"): lambda d: _build(TestResult, d),
    (ExperimentReport, "srm"): lambda d: _build(SrmResult, d),
    (TelescopeBlock, "entries"): _tuple_of(TelescopeEntry),
    (Report, "experiments"): _tuple_of(ExperimentReport),
    (Report, "meta"): lambda d: _build(MetaResult, d),
    (Report, "meta_excluded"): _tuple_of(MetaExclusion),
    (Report, "telescope"): lambda d: _build(TelescopeBlock, d),
}


def parse_json(text: str) -> object:
    """Rebuild a result object from emit_json output."""
    document = json.loads(text)
    if not isinstance(document, dict) or "kind" not in document or "data" not in document:
        raise ValueError("expected a document with 'kind' and 'data'")
    cls = _RESULT_KINDS.get(document["kind"])
    if cls is None:
        raise ValueError(f"unknown kind {document['kind']!r}")
    return _build(cls, document["data"])


# ---------------------------------------------------------------------------
# chart


def render_chart(report: Report, path: Union[str, Path]) -> None:
    """Draw absolute effects with confidence intervals to a static SVG.

    Every experiment appears with its uncorrected interval; when a
    telescope block is present the d33 benchmark is drawn as a dashed
    line and the original study is highlighted.  Output bytes are
    deterministic for a given report.
    """
    import matplotlib
    from matplotlib.figure import Figure

    experiments = report.experiments
    original = report.telescope.original_label if report.telescope else None

    fig = Figure(figsize=(7.5, 1.0 + 0.7 * len(experiments)))
    ax = fig.subplots()
    for idx, exp in enumerate(experiments):
        r = exp.uncorrected
        is_original = exp.summary.label == original
        ax.errorbar(
            [r.abs_diff * 100.0],
            [idx],
            xerr=[[(r.abs_diff - r.ci_low) * 100.0], [(r.ci_high - r.abs_diff) * 100.0]],
            fmt="s" if is_original else "o",
            color="#1f4e79" if is_original else "#444444",
            capsize=3,
            markersize=6 if is_original else 5,
        )
    ax.axvline(0.0, color="#999999", linewidth=0.8)
    if report.telescope is not None:
        ax.axvline(
            report.telescope.d33_absolute * 100.0,
            color="#b04a3a",
            linewidth=1.0,
            linestyle="--",
        )
        ax.text(
            report.telescope.d33_absolute * 100.0,
            len(experiments) - 0.45,
            " d33 of original",
            color="#b04a3a",
            fontsize=8,
            va="top",
        )
    ax.set_yticks(range(len(experiments)))
    ax.set_yticklabels([e.summary.label for e in experiments])
    ax.invert_yaxis()
    ax.set_xlabel(
        f"absolute difference in conversion rate (pp), {format_pct(1 - report.alpha, 0)} CI"
    )
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    fig.tight_layout()
    with matplotlib.rc_context({"svg.hashsalt": "abstat"}):
        fig.savefig(str(path), format="svg", metadata={"Date": None})
