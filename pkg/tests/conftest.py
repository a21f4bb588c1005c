"""Prints one PASS/FAIL line per acceptance criterion after the run.

Acceptance tests are named ``test_criterion_<n>_...``; a criterion passes
when every test carrying its number passed.
"""

import re

_CRITERION = re.compile(r"test_criterion_(\d+)_")
_outcomes: dict[int, list[bool]] = {}


def pytest_runtest_logreport(report):
    match = _CRITERION.search(report.nodeid)
    if not match:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        _outcomes.setdefault(int(match.group(1)), []).append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_outcomes):
        results = _outcomes[number]
        verdict = "PASS" if all(results) else "FAIL"
        terminalreporter.write_line(
            f"criterion {number:2d}: {verdict} ({sum(results)}/{len(results)} checks passed)")
