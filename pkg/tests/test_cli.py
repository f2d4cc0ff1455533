"""Command line surface: subcommands, formats, exit codes."""

from __future__ import annotations

from pathlib import Path

import pytest

from abstat.cli import EXIT_GUARDRAIL, EXIT_OK, EXIT_SCHEMA, EXIT_VALIDATION, main
from abstat.ingest import parse_experiments
from abstat.proportions import TestResult as PropTestResult
from abstat.report import Report, parse_json, run_report

DATA = Path(__file__).resolve().parent.parent / "data"
COUNTS = str(DATA / "corners_counts.csv")


def test_proptest_defaults_to_continuity(capsys):
    assert main(["proptest", "445", "32", "474", "53"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "p=0.049" in out
    assert "with continuity correction" in out


def test_proptest_uncorrected(capsys):
    assert main(["proptest", "445", "32", "474", "53", "--no-yates"]) == EXIT_OK
    assert "p=0.037" in capsys.readouterr().out


def test_proptest_json(capsys):
    assert main(["proptest", "445", "32", "474", "53", "--json"]) == EXIT_OK
    result = parse_json(capsys.readouterr().out)
    assert isinstance(result, PropTestResult)
    assert result.p_value == pytest.approx(0.048524, abs=1e-5)


def test_proptest_rejects_bad_counts(capsys):
    assert main(["proptest", "445", "500", "474", "53"]) == EXIT_VALIDATION
    assert "error" in capsys.readouterr().err


def test_srm_pass_and_fail(capsys):
    assert main(["srm", "50", "60"]) == EXIT_OK
    assert "verdict: pass" in capsys.readouterr().out
    assert main(["srm", "65495", "83331"]) == EXIT_GUARDRAIL
    out = capsys.readouterr().out
    assert "verdict: fail" in out
    assert "10^-467" in out


def test_power_line(capsys):
    code = main([
        "power", "--baseline", "0.0719", "--lift", "0.02",
        "--n-control", "445", "--n-treatment", "474",
        "--tail", "right", "--alpha", "0.025",
    ])
    assert code == EXIT_OK
    assert "power=3.04%" in capsys.readouterr().out


def test_samplesize_rule_and_exact(capsys):
    assert main(["samplesize", "--baseline", "0.0719", "--lift", "0.02"]) == EXIT_OK
    assert "n=516329" in capsys.readouterr().out
    code = main([
        "samplesize", "--baseline", "0.0719", "--lift", "0.02",
        "--alpha", "0.05", "--power", "0.8",
    ])
    assert code == EXIT_OK
    assert "normal approximation" in capsys.readouterr().out


def test_mde_line(capsys):
    code = main(["mde", "--baseline", "0.0719", "--n-control", "445", "--n-treatment", "474"])
    assert code == EXIT_OK
    assert "rel 66.44%" in capsys.readouterr().out


def test_telescope_command(capsys):
    assert main(["telescope", COUNTS, "--original", "bac"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.count("original_too_small=yes") == 3


def test_exaggeration_by_snr_and_by_design(capsys):
    assert main(["exaggeration", "--snr", "0.08433512154"]) == EXIT_OK
    assert "27.84x" in capsys.readouterr().out
    code = main([
        "exaggeration", "--baseline", "0.0719", "--lift", "0.02",
        "--n-control", "445", "--n-treatment", "474",
    ])
    assert code == EXIT_OK
    assert "27.84x" in capsys.readouterr().out
    assert main(["exaggeration", "--baseline", "0.0719"]) == EXIT_VALIDATION


def test_fpr_line(capsys):
    assert main(["fpr", "--power", "0.8", "--prior", "0.1"]) == EXIT_OK
    assert "21.95%" in capsys.readouterr().out


def test_meta_command(capsys):
    assert main(["meta", COUNTS, "--original", "bac"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "combined rel lift 0.21%" in out
    assert "excluded: bac [original]" in out


def test_meta_needs_two_studies(tmp_path, capsys):
    single = tmp_path / "single.csv"
    single.write_text(
        "label,n_control,x_control,n_treatment,x_treatment\nbac,445,32,474,53\n"
    )
    assert main(["meta", str(single)]) == EXIT_VALIDATION


def test_simulate_deterministic_across_jobs(capsys):
    argv = [
        "simulate", "--baseline", "0.0719", "--lift", "0.02",
        "--n-control", "445", "--n-treatment", "474",
        "--replicates", "20000", "--seed", "7",
    ]
    assert main(argv + ["--jobs", "1"]) == EXIT_OK
    first = capsys.readouterr().out
    assert main(argv + ["--jobs", "4"]) == EXIT_OK
    assert capsys.readouterr().out == first


def test_report_text_to_stdout(capsys):
    assert main(["report", COUNTS, "--original", "bac"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "combined rel lift 0.21%" in out
    assert "small telescopes vs original 'bac'" in out


def test_report_text_to_file(tmp_path, capsys):
    target = tmp_path / "report.txt"
    assert main(["report", COUNTS, "--output", str(target)]) == EXIT_OK
    assert "chi-square" in target.read_text()
    assert capsys.readouterr().out == ""


def test_report_json_matches_library(tmp_path):
    target = tmp_path / "report.json"
    code = main(["report", COUNTS, "--original", "bac", "--format", "json",
                 "--output", str(target)])
    assert code == EXIT_OK
    rebuilt = parse_json(target.read_text())
    assert isinstance(rebuilt, Report)
    expected = run_report(parse_experiments(COUNTS), original="bac")
    assert rebuilt == expected


def test_report_svg_and_chart(tmp_path):
    chart = tmp_path / "chart.svg"
    code = main(["report", COUNTS, "--original", "bac", "--format", "svg",
                 "--output", str(chart)])
    assert code == EXIT_OK
    assert chart.read_bytes().startswith(b"<?xml")

    alongside = tmp_path / "alongside.svg"
    text_out = tmp_path / "report.txt"
    code = main(["report", COUNTS, "--output", str(text_out), "--chart", str(alongside)])
    assert code == EXIT_OK
    assert alongside.stat().st_size > 0
    assert text_out.stat().st_size > 0


def test_report_svg_requires_output(capsys):
    assert main(["report", COUNTS, "--format", "svg"]) == EXIT_VALIDATION
    assert "requires --output" in capsys.readouterr().err


def test_report_guardrail_exit(tmp_path, capsys):
    skew = tmp_path / "skew.csv"
    skew.write_text(
        "label,n_control,x_control,n_treatment,x_treatment\nskew,65495,100,83331,130\n"
    )
    target = tmp_path / "report.txt"
    assert main(["report", str(skew), "--output", str(target)]) == EXIT_GUARDRAIL
    # the report is still written so the failure can be inspected
    assert "sample ratio mismatch" in target.read_text()


def test_schema_error_exit(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("label,n_control,bogus\n")
    assert main(["report", str(bad)]) == EXIT_SCHEMA
    assert "bogus" in capsys.readouterr().err


def test_row_error_exit(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("label,n_control,x_control,n_treatment,x_treatment\na,10,20,10,2\n")
    assert main(["report", str(bad)]) == EXIT_VALIDATION
    assert "line 2" in capsys.readouterr().err


def test_missing_file_exit(capsys):
    assert main(["report", "no_such_file.csv"]) == EXIT_SCHEMA
    assert "no_such_file.csv" in capsys.readouterr().err


def test_unknown_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 2
