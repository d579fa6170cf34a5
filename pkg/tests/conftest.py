"""Shared pytest wiring.

The acceptance tests each record one summary line; printing them from a
terminal-summary hook keeps the checklist visible in a plain ``pytest -v``
run, where captured stdout of passing tests is hidden.
"""

ACCEPTANCE_LINES: list = []


def record_acceptance(line: str) -> None:
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance checklist")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
