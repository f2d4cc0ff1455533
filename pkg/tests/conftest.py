"""Test-wide configuration.

Loads a deterministic hypothesis profile and prints a one-line verdict
per numbered golden criterion after the run, aggregated over the
``test_cNN*`` functions in test_acceptance.py.
"""

from __future__ import annotations

import re

from hypothesis import settings

settings.register_profile("golden", deadline=None, derandomize=True)
settings.load_profile("golden")

_CRITERIA = {
    1: "counts-form study: p-values and intervals, both continuity settings",
    2: "rate-form studies: reconstructed lifts and p-values",
    3: "allocation guardrail: extreme mismatch flagged with log-scale p",
    4: "rule-of-16 sample sizes",
    5: "power grid at one-sided 2.5% across the four designs",
    6: "fixed-effect pooling of the three replications",
    7: "exaggeration ratios, confirmed by simulation at 1e6 replicates",
    8: "expected z and two-sided p at 80% power",
    9: "false positive risk under a 10% prior",
    10: "client studies: reconstructed p-values and power at scale",
    11: "an effect of the original size would be unmissable at replication scale",
    12: "property suites, 1000 randomized cases each",
}

_outcomes: dict[int, dict[str, int]] = {}

_NODE = re.compile(r"test_acceptance\.py::test_c(\d{2})")


def pytest_runtest_logreport(report):
    match = _NODE.search(report.nodeid)
    if match is None:
        return
    bucket = _outcomes.setdefault(int(match.group(1)), {"passed": 0, "failed": 0})
    if report.failed:
        bucket["failed"] += 1
    elif report.when == "call" and report.passed:
        bucket["passed"] += 1


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _outcomes:
        return
    terminalreporter.ensure_newline()
    terminalreporter.section("acceptance criteria", sep="-")
    for criterion in sorted(_CRITERIA):
        bucket = _outcomes.get(criterion, {"passed": 0, "failed": 0})
        if bucket["failed"]:
            verdict = "FAIL"
        elif bucket["passed"]:
            verdict = "PASS"
        else:
            verdict = "NOT RUN"
        label = _CRITERIA.get(criterion, "")
        terminalreporter.write_line(f"criterion {criterion:2d}: {verdict}  {label}")
