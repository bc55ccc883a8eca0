import pytest
from hypothesis import settings

from dhtbits.fixtures import ex1, ex2

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def h1():
    return ex1()


@pytest.fixture(scope="session")
def h2():
    return ex2()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
