import pytest

from helpers import corpus

_acceptance_lines: list[str] = []


@pytest.fixture(scope="session")
def graph_corpus():
    return corpus()


@pytest.fixture(scope="session")
def acceptance_log():
    return _acceptance_lines


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
