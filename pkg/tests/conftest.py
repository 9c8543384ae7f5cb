import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record a PASS/FAIL line for an acceptance criterion; also printed in the terminal summary."""

    def _report(criterion, ok, detail, gating=True):
        status = ("PASS" if ok else "FAIL") if gating else "INFO"
        line = f"[{status}] criterion {criterion}: {detail}"
        print(line)
        ACCEPTANCE_LINES.append(line)

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
