from pathlib import Path

import pytest

from tcqubo import parse_graph, parse_instance

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def example_negative():
    """Bundled example: the tree is NOT displayed by the network."""
    return parse_instance((DATA / "fig_t1.json").read_text())


@pytest.fixture(scope="session")
def example_positive():
    """Bundled example: the tree IS displayed by the network."""
    return parse_instance((DATA / "fig_t2.json").read_text())


@pytest.fixture(scope="session")
def displayed_pair():
    """The two trees the example network displays."""
    balanced = parse_graph((DATA / "balanced_tree.txt").read_text(), "edgelist")
    caterpillar = parse_graph((DATA / "caterpillar_tree.txt").read_text(),
                              "edgelist")
    return balanced, caterpillar
