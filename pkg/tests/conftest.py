import numpy as np
import pytest

from crnstrata import example_path, load_network


@pytest.fixture(scope="session")
def ex1():
    return load_network(example_path("example1"))


@pytest.fixture(scope="session")
def ex2():
    return load_network(example_path("example2"))


@pytest.fixture(scope="session")
def triangle():
    return load_network(example_path("triangle"))


@pytest.fixture(scope="session")
def unbalanced():
    return load_network(example_path("not_balanced"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
