import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture
def rng():
    return np.random.default_rng(20260817)


@pytest.fixture
def edge_graph():
    from rdpgmap import Graph

    return Graph(2, [(0, 1)])


@pytest.fixture
def triangle():
    from rdpgmap import Graph

    return Graph(3, [(0, 1), (0, 2), (1, 2)])


def random_graph(n, density, seed):
    """Erdos-Renyi helper shared by several suites."""
    from rdpgmap import Graph

    rng = np.random.default_rng(seed)
    a = rng.random((n, n)) < density
    a = np.triu(a, k=1)
    i, j = np.nonzero(a)
    return Graph(n, list(zip(i.tolist(), j.tolist())))
