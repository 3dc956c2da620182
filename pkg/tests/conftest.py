import pytest

from crystal_ca import AlgebraSpec, make_backend

# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def a1_1():
    return make_backend(AlgebraSpec("A1", 1))


@pytest.fixture(scope="session")
def a1_2():
    return make_backend(AlgebraSpec("A1", 2))


@pytest.fixture(scope="session")
def a1_3():
    return make_backend(AlgebraSpec("A1", 3))
