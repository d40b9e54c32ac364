import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import random_integer_graph  # noqa: E402

from tropdiv.family import GnSpec, build_g0, build_gn  # noqa: E402
from tropdiv.metric_graph import MetricGraph, circle, theta  # noqa: E402

DATA = Path(__file__).resolve().parent.parent / "data"


def graph_zoo(seed: int = 7):
    """G_0, G_2, G_3, a circle, a theta graph and 5 random graphs of genus <= 4."""
    zoo = {
        "G0": build_g0()[0],
        "G2": build_gn(GnSpec(n=2))[0],
        "G3": build_gn(GnSpec(n=3))[0],
        "circle": circle(3),
        "theta": theta((1, 2, 3)),
    }
    rng = random.Random(seed)
    for i in range(5):
        vs, es = random_integer_graph(rng)
        zoo[f"random{i}"] = MetricGraph(vs, es)
    return zoo


@pytest.fixture(scope="session")
def zoo():
    return graph_zoo()


@pytest.fixture(scope="session")
def g0():
    return build_g0()


@pytest.fixture(scope="session")
def g2():
    return build_gn(GnSpec(n=2))


@pytest.fixture
def data_dir():
    return DATA


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
