"""Shared reporting for the acceptance suite.

Verdict lines are collected through a session fixture and emitted as one
block in the terminal summary, after capture has been torn down, so they
always reach the real stdout regardless of capture mode.
"""
import pytest


class AcceptanceVerdicts:
    def __init__(self):
        self.lines = []

    def record(self, num, label, ok, detail):
        line = f"criterion {num} ({label}): {'PASS' if ok else 'FAIL'} - {detail}"
        self.lines.append((num, line))
        return line


_VERDICTS = AcceptanceVerdicts()


@pytest.fixture(scope="session")
def acceptance_verdicts():
    return _VERDICTS


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _VERDICTS.lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_VERDICTS.lines):
            terminalreporter.write_line(line)
