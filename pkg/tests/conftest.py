import pytest

from _support import ACCEPTANCE, BASE, NEGATIVE


@pytest.fixture
def base():
    return BASE


@pytest.fixture
def negative():
    return NEGATIVE


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        for _, line in ACCEPTANCE[number]:
            terminalreporter.write_line(line)
