"""Shared test plumbing: the acceptance verdict banner."""

verdicts: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if verdicts:
        terminalreporter.section("acceptance criteria")
        for line in verdicts:
            terminalreporter.write_line(line)
