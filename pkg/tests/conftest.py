import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from falqon.graphs import Graph  # noqa: E402


@pytest.fixture
def path3():
    return Graph.from_pairs(3, [(0, 1), (1, 2)], name="path3")


@pytest.fixture
def triangle():
    return Graph.from_pairs(3, [(0, 1), (1, 2), (0, 2)], name="k3")


@pytest.fixture
def k4():
    return Graph.from_pairs(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], name="k4")


@pytest.fixture
def empty3():
    return Graph(3, (), name="empty3")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for num in sorted(results):
            terminalreporter.write_line(results[num])
