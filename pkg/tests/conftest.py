import pytest

from carpetbench.catalog import carpet104, sc8

ACCEPTANCE_LINES: list = []


@pytest.fixture(scope="session")
def carpet():
    return carpet104()


@pytest.fixture(scope="session")
def carpet_sc8():
    return sc8()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
