"""Command line interface.

Every statistical routine in the library is reachable as a subcommand,
and ``report`` runs the full pipeline over a CSV of experiments.

Exit codes:
    0  success
    2  the input could not be read (unknown columns, malformed file)
    3  the input was readable but a value failed validation
    4  a guardrail tripped (sample ratio mismatch)
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence, Union

from abstat.ingest import SchemaError, parse_experiments
from abstat.montecarlo import SimConfig, simulate
from abstat.power import (
    RIGHT,
    TWO_SIDED,
    DesignSpec,
    exaggeration_ratio,
    false_positive_risk,
    lehr_sample_size,
    mde_from_power,
    power_two_proportions,
    sample_size_two_proportions,
)
from abstat.proportions import ArmCount, two_proportion_test
from abstat.report import (
    emit_json,
    format_p,
    format_pct,
    render_chart,
    render_text,
    run_report,
)
from abstat.srm import DEFAULT_THRESHOLD, srm_check

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_VALIDATION = 3
EXIT_GUARDRAIL = 4

_TAILS = {"two": TWO_SIDED, "right": RIGHT}


def _p_from_log10(log10_p: float) -> float:
    return 10.0 ** log10_p if log10_p > -300.0 else 0.0


def _write_output(text: str, path: Union[str, None]) -> None:
    if path is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text if text.endswith("\n") else text + "\n")


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_proptest(args: argparse.Namespace) -> int:
    control = ArmCount(args.n_control, args.x_control)
    treatment = ArmCount(args.n_treatment, args.x_treatment)
    result = two_proportion_test(control, treatment, args.alpha, continuity=args.yates)
    if args.json:
        print(emit_json(result))
        return EXIT_OK
    correction = "with" if result.continuity_used else "without"
    print(
        f"control {control.x}/{control.n} ({format_pct(result.rate_control)}), "
        f"treatment {treatment.x}/{treatment.n} ({format_pct(result.rate_treatment)})"
    )
    print(
        f"abs diff {format_pct(result.abs_diff)}, rel lift {format_pct(result.rel_lift)}"
    )
    print(
        f"chi2={result.chi2:.4f} ({correction} continuity correction) "
        f"p={format_p(result.p_value, result.log10_p)} "
        f"ci=[{format_pct(result.ci_low)}, {format_pct(result.ci_high)}]"
    )
    return EXIT_OK


def _cmd_srm(args: argparse.Namespace) -> int:
    result = srm_check(args.n_control, args.n_treatment, args.expected_share, args.threshold)
    if args.json:
        print(emit_json(result))
    else:
        preferred = "exact" if result.log10_p_two_sided == result.log10_p_exact else "normal"
        print(
            f"z={result.z:.2f} "
            f"p={format_p(_p_from_log10(result.log10_p_two_sided), result.log10_p_two_sided)} "
            f"({preferred})"
        )
        print(
            f"observed control share {format_pct(result.observed_share, 4)} "
            f"vs expected {format_pct(result.expected_share, 4)}"
        )
        print(f"verdict: {result.verdict}")
    return EXIT_GUARDRAIL if result.verdict == "fail" else EXIT_OK


def _design_from_args(args: argparse.Namespace) -> DesignSpec:
    return DesignSpec(
        baseline_rate=args.baseline,
        relative_mde=args.lift,
        n_control=args.n_control,
        n_treatment=args.n_treatment,
        alpha=args.alpha,
        tail=_TAILS[args.tail],
    )


def _cmd_power(args: argparse.Namespace) -> int:
    spec = _design_from_args(args)
    result = power_two_proportions(spec)
    if args.json:
        print(emit_json(result))
        return EXIT_OK
    print(
        f"power={format_pct(result.power)} snr={result.snr:.4f} "
        f"(baseline {format_pct(args.baseline)}, lift {format_pct(args.lift)}, "
        f"{args.tail}-tailed alpha={args.alpha:g})"
    )
    return EXIT_OK


def _cmd_samplesize(args: argparse.Namespace) -> int:
    if args.power is None and args.alpha is None:
        n = lehr_sample_size(args.baseline, args.lift)
        rule = "lehr rule (80% power, two-sided alpha=0.05)"
    else:
        alpha = 0.05 if args.alpha is None else args.alpha
        power = 0.80 if args.power is None else args.power
        n = sample_size_two_proportions(
            args.baseline, args.lift, alpha, power, _TAILS[args.tail]
        )
        rule = f"normal approximation ({format_pct(power)} power, {args.tail}-tailed alpha={alpha:g})"
    print(
        f"n={n} per arm to detect a {format_pct(args.lift)} relative lift "
        f"on a {format_pct(args.baseline)} baseline, {rule}"
    )
    return EXIT_OK


def _cmd_mde(args: argparse.Namespace) -> int:
    rel_mde = mde_from_power(
        args.baseline, args.n_control, args.n_treatment, args.power, args.alpha / 2.0
    )
    print(
        f"minimum detectable effect at {format_pct(args.power)} power: "
        f"rel {format_pct(rel_mde)}, abs {format_pct(rel_mde * args.baseline, 4)}"
    )
    return EXIT_OK


def _cmd_telescope(args: argparse.Namespace) -> int:
    experiments = parse_experiments(args.csv)
    report = run_report(experiments, alpha=args.alpha, original=args.original)
    block = report.telescope
    assert block is not None
    print(
        f"original {block.original_label!r}: d33 abs "
        f"{format_pct(block.d33_absolute, 3)} "
        f"(one-sided alpha={block.alpha_one_sided:g})"
    )
    for entry in block.entries:
        print(
            f"{entry.label}: diff {format_pct(entry.abs_diff, 3)}, "
            f"upper bound {format_pct(entry.upper_bound, 3)}, "
            f"original_too_small={'yes' if entry.original_too_small else 'no'}"
        )
    return EXIT_OK


def _cmd_exaggeration(args: argparse.Namespace) -> int:
    if args.snr is not None:
        snr = args.snr
    else:
        missing = [
            name
            for name, value in (
                ("--baseline", args.baseline),
                ("--lift", args.lift),
                ("--n-control", args.n_control),
                ("--n-treatment", args.n_treatment),
            )
            if value is None
        ]
        if missing:
            raise ValueError(f"either --snr or a full design is required; missing {missing}")
        spec = DesignSpec(
            baseline_rate=args.baseline,
            relative_mde=args.lift,
            n_control=args.n_control,
            n_treatment=args.n_treatment,
            alpha=args.alpha,
            tail=TWO_SIDED,
        )
        snr = power_two_proportions(spec).snr
    ratio = exaggeration_ratio(snr, args.alpha / 2.0)
    print(
        f"expected exaggeration of significant estimates: {ratio:.2f}x "
        f"(snr={snr:.4f}, one-sided alpha={args.alpha / 2.0:g})"
    )
    return EXIT_OK


def _cmd_fpr(args: argparse.Namespace) -> int:
    risk = false_positive_risk(args.alpha / 2.0, args.power, args.prior)
    print(
        f"false positive risk: {format_pct(risk)} "
        f"(one-sided alpha={args.alpha / 2.0:g}, power {format_pct(args.power)}, "
        f"prior true share {format_pct(args.prior)})"
    )
    return EXIT_OK


def _cmd_meta(args: argparse.Namespace) -> int:
    experiments = parse_experiments(args.csv)
    report = run_report(experiments, alpha=args.alpha, original=args.original)
    if report.meta is None:
        raise ValueError("fewer than two experiments are eligible for pooling")
    if args.json:
        print(emit_json(report.meta))
        return EXIT_OK
    m = report.meta
    print(
        f"combined rel lift {format_pct(m.combined_rel_lift)}, "
        f"se(log rr)={m.combined_se_log:.6f}, z={m.z:.2f}, p={format_p(m.p_value)}"
    )
    for study in m.per_study:
        print(f"  {study.label}: weight share {format_pct(study.weight_share)}")
    if report.meta_excluded:
        reasons = ", ".join(f"{e.label} [{e.reason}]" for e in report.meta_excluded)
        print(f"excluded: {reasons}")
    return EXIT_OK


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = SimConfig(
        n_control=args.n_control,
        n_treatment=args.n_treatment,
        baseline_rate=args.baseline,
        true_rel_lift=args.lift,
        replicates=args.replicates,
        seed=args.seed,
        alpha_one_sided=args.alpha / 2.0,
    )
    result = simulate(config, n_jobs=args.jobs)
    if args.json:
        print(emit_json(result))
        return EXIT_OK
    print(f"replicates={args.replicates} seed={args.seed}")
    print(f"empirical power (right tail): {format_pct(result.empirical_power_right_tail, 3)}")
    print(f"mean significant estimate: {format_pct(result.mean_significant_estimate, 4)}")
    print(f"empirical exaggeration: {result.empirical_exaggeration:.3f}x")
    print(f"sign error rate: {format_pct(result.sign_error_rate, 3)}")
    print(f"ci coverage: {format_pct(result.ci_coverage, 2)}")
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    experiments = parse_experiments(args.csv)
    report = run_report(
        experiments,
        alpha=args.alpha,
        original=args.original,
        srm_threshold=args.srm_threshold,
        expected_control_share=args.expected_share,
    )
    if args.format == "svg":
        if args.output is None:
            raise ValueError("--format svg requires --output")
        render_chart(report, args.output)
    elif args.format == "json":
        _write_output(emit_json(report), args.output)
    else:
        _write_output(render_text(report), args.output)
    if args.chart is not None:
        render_chart(report, args.chart)
    failed = any(e.srm.verdict == "fail" for e in report.experiments)
    return EXIT_GUARDRAIL if failed else EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_design_arguments(parser: argparse.ArgumentParser, required: bool = True) -> None:
    parser.add_argument("--baseline", type=float, required=required,
                        help="control conversion rate, e.g. 0.05")
    parser.add_argument("--lift", type=float, required=required,
                        help="relative lift of treatment over control, e.g. 0.02")


def _add_arm_size_arguments(parser: argparse.ArgumentParser, required: bool = True) -> None:
    parser.add_argument("--n-control", type=int, required=required, help="control arm size")
    parser.add_argument("--n-treatment", type=int, required=required, help="treatment arm size")


def _add_alpha_argument(parser: argparse.ArgumentParser, default: float = 0.05) -> None:
    parser.add_argument("--alpha", type=float, default=default,
                        help=f"two-sided significance level (default {default})")


def _add_tail_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tail", choices=sorted(_TAILS), default="two",
                        help="alternative hypothesis (default two)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="abstat",
        description="trustworthy analysis of A/B test outcomes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("proptest", help="two-proportion chi-square test")
    p.add_argument("n_control", type=int)
    p.add_argument("x_control", type=int)
    p.add_argument("n_treatment", type=int)
    p.add_argument("x_treatment", type=int)
    _add_alpha_argument(p)
    p.add_argument("--yates", action=argparse.BooleanOptionalAction, default=True,
                   help="apply the continuity correction (default on)")
    p.add_argument("--json", action="store_true", help="print the result as JSON")
    p.set_defaults(handler=_cmd_proptest)

    p = sub.add_parser("srm", help="sample ratio mismatch check")
    p.add_argument("n_control", type=int)
    p.add_argument("n_treatment", type=int)
    p.add_argument("--expected-share", type=float, default=0.5,
                   help="configured control traffic share (default 0.5)")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD,
                   help=f"p-value below which the check fails (default {DEFAULT_THRESHOLD:g})")
    p.add_argument("--json", action="store_true", help="print the result as JSON")
    p.set_defaults(handler=_cmd_srm)

    p = sub.add_parser("power", help="power of a two-proportion design")
    _add_design_arguments(p)
    _add_arm_size_arguments(p)
    _add_alpha_argument(p)
    _add_tail_argument(p)
    p.add_argument("--json", action="store_true", help="print the result as JSON")
    p.set_defaults(handler=_cmd_power)

    p = sub.add_parser("samplesize", help="per-arm sample size for a target design")
    _add_design_arguments(p)
    p.add_argument("--alpha", type=float, default=None,
                   help="two-sided significance level (default: lehr rule)")
    p.add_argument("--power", type=float, default=None,
                   help="target power (default: lehr rule)")
    _add_tail_argument(p)
    p.set_defaults(handler=_cmd_samplesize)

    p = sub.add_parser("mde", help="minimum detectable effect at a target power")
    p.add_argument("--baseline", type=float, required=True,
                   help="control conversion rate, e.g. 0.05")
    _add_arm_size_arguments(p)
    p.add_argument("--power", type=float, default=0.80, help="target power (default 0.8)")
    _add_alpha_argument(p)
    p.set_defaults(handler=_cmd_mde)

    p = sub.add_parser("telescope", help="small-telescopes check of replications")
    p.add_argument("csv", help="experiments CSV, counts or rates schema")
    p.add_argument("--original", required=True,
                   help="label of the study whose design sets the benchmark")
    _add_alpha_argument(p)
    p.set_defaults(handler=_cmd_telescope)

    p = sub.add_parser("exaggeration", help="expected inflation of significant estimates")
    p.add_argument("--snr", type=float, default=None,
                   help="true effect over its null standard error")
    _add_design_arguments(p, required=False)
    _add_arm_size_arguments(p, required=False)
    _add_alpha_argument(p)
    p.set_defaults(handler=_cmd_exaggeration)

    p = sub.add_parser("fpr", help="false positive risk given a prior")
    _add_alpha_argument(p)
    p.add_argument("--power", type=float, required=True, help="power against the true effect")
    p.add_argument("--prior", type=float, required=True,
                   help="prior share of tested effects that are real")
    p.set_defaults(handler=_cmd_fpr)

    p = sub.add_parser("meta", help="fixed-effect meta-analysis of a CSV of experiments")
    p.add_argument("csv", help="experiments CSV, counts or rates schema")
    p.add_argument("--original", default=None,
                   help="label to exclude from pooling (the study under replication)")
    _add_alpha_argument(p)
    p.add_argument("--json", action="store_true", help="print the result as JSON")
    p.set_defaults(handler=_cmd_meta)

    p = sub.add_parser("simulate", help="monte carlo study of a two-proportion design")
    _add_design_arguments(p)
    _add_arm_size_arguments(p)
    p.add_argument("--replicates", type=int, default=100_000,
                   help="number of simulated experiments (default 100000)")
    p.add_argument("--seed", type=int, required=True, help="rng seed; same seed, same result")
    p.add_argument("--jobs", type=int, default=1, help="worker threads (default 1)")
    _add_alpha_argument(p)
    p.add_argument("--json", action="store_true", help="print the result as JSON")
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("report", help="full pipeline over a CSV of experiments")
    p.add_argument("csv", help="experiments CSV, counts or rates schema")
    p.add_argument("--format", choices=("text", "json", "svg"), default="text",
                   help="output format (default text)")
    p.add_argument("--output", default=None,
                   help="output path (default stdout; required for svg)")
    p.add_argument("--chart", default=None,
                   help="also render the effect chart to this SVG path")
    p.add_argument("--original", default=None,
                   help="label of the original study for the telescope block")
    _add_alpha_argument(p)
    p.add_argument("--srm-threshold", type=float, default=DEFAULT_THRESHOLD,
                   help=f"allocation guardrail level (default {DEFAULT_THRESHOLD:g})")
    p.add_argument("--expected-share", type=float, default=0.5,
                   help="configured control traffic share (default 0.5)")
    p.set_defaults(handler=_cmd_report)

    return parser


def main(argv: Union[Sequence[str], None] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
