import numpy as np
import pytest

from revconvex.instance import load_fixture


@pytest.fixture(scope="session")
def fixtures():
    return {i: load_fixture(f"example{i}") for i in range(1, 7)}


@pytest.fixture(scope="session")
def classified(fixtures):
    return {i: inst.classify() for i, inst in fixtures.items()}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
