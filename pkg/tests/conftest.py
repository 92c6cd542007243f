import re

import pytest

# detail text per acceptance criterion, filled in by the tests
ACCEPTANCE_DETAILS = {}


@pytest.fixture
def record():
    """record(number, text): attach a measurement to an acceptance line."""

    def _record(number, text):
        ACCEPTANCE_DETAILS[number] = text
    return _record


def pytest_terminal_summary(terminalreporter):
    lines = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            match = re.search(r"test_acceptance\.py::test_criterion_(\d+)", getattr(rep, "nodeid", ""))
            if match is None or getattr(rep, "when", "call") != "call" and outcome != "error":
                continue
            n = int(match.group(1))
            status = "PASS" if outcome == "passed" else "FAIL"
            lines[n] = (status, getattr(rep, "duration", 0.0))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(lines):
        status, duration = lines[n]
        detail = ACCEPTANCE_DETAILS.get(n, "")
        terminalreporter.write_line(f"criterion {n:2d}: {status}  [{duration:6.1f} s]  {detail}")
