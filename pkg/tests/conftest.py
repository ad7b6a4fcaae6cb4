import pytest

from modules.gadget import lab_params
from modules.graph import Graph, complete_bipartite, complete_graph, cycle_graph, path_graph, random_regular

K4_TEXT = "4 6\n0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n"
P2_TEXT = "2 1\n0 1\n"
# triangular prism: two triangles joined by a perfect matching, max cut 7
PRISM_TEXT = "6 9\n0 1\n1 2\n0 2\n3 4\n4 5\n3 5\n0 3\n1 4\n2 5\n"


@pytest.fixture
def k4() -> Graph:
    return complete_graph(4)


@pytest.fixture
def p2() -> Graph:
    return path_graph(2)


@pytest.fixture
def c6() -> Graph:
    return cycle_graph(6)


@pytest.fixture
def k33() -> Graph:
    return complete_bipartite(3, 3)


@pytest.fixture
def single() -> Graph:
    return Graph(n=1)


@pytest.fixture
def cubic6() -> list[Graph]:
    return [random_regular(6, 3, seed=s) for s in (1, 2)]


@pytest.fixture
def k4_lab():
    """t=8, bhat=2, uhat=3, tau=1.1 on a degree-3 graph."""
    return lab_params(8, bhat=2.0, uhat=3.0, max_degree=3, tau=1.1)


@pytest.fixture
def graph_files(tmp_path):
    paths = {}
    for name, text in (("k4", K4_TEXT), ("p2", P2_TEXT), ("prism", PRISM_TEXT)):
        path = tmp_path / f"{name}.txt"
        path.write_text(text)
        paths[name] = path
    return paths
