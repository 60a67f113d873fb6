"""Shared test hooks.

Acceptance tests register their one-line results here so the lines appear
in the terminal summary even under pytest's output capture.
"""

acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.line(line)
