import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from brue.network import enumerate_paths  # noqa: E402
from brue.topologies import make_n1, make_n2, make_two_road, make_wheatstone, make_wheatstone_chain  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def wheatstone():
    net = make_wheatstone()
    return net, enumerate_paths(net)


@pytest.fixture(scope="session")
def tworoad():
    net = make_two_road()
    return net, enumerate_paths(net)


@pytest.fixture(scope="session")
def chain2():
    net = make_wheatstone_chain(2, 0.1)
    return net, enumerate_paths(net)


@pytest.fixture(scope="session")
def n1():
    return make_n1()


@pytest.fixture(scope="session")
def n2():
    return make_n2()
