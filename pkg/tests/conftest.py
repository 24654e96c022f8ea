import pytest

from tree_length_recovery.models.schemas import CaterpillarComposition, TreeClass, TreeClassTag
from tree_length_recovery.models.tree import WeightedTree
from tree_length_recovery.services.caterpillar_service import caterpillar_service
from tree_length_recovery.utils.newick import parse_tree


@pytest.fixture
def quartet() -> WeightedTree:
    """Unit quartet with cherries {a, b} and {c, d}."""
    return parse_tree("((a:1,b:1):1,c:1,d:1);")


@pytest.fixture
def star3() -> WeightedTree:
    """Three-leaf star with pendant lengths 1, 2, 3."""
    return parse_tree("(a:1,b:2,c:3);")


@pytest.fixture
def unit_star3() -> WeightedTree:
    """Unit three-leaf star."""
    return parse_tree("(a:1,b:1,c:1);")


@pytest.fixture
def cherry() -> WeightedTree:
    """Rooted unit cherry."""
    return parse_tree("(a:1,b:1);@root")


@pytest.fixture
def rooted_triple() -> WeightedTree:
    """Rooted binary unit tree ((a, b), c)."""
    return parse_tree("((a:1,b:1):1,c:1);@root")


@pytest.fixture
def general_position_tree() -> WeightedTree:
    """Five-leaf simple tree with power-of-two edge lengths."""
    return parse_tree("((a:1,b:2):64,(c:4,d:8):128,e:16);")


@pytest.fixture
def caterpillar_121() -> WeightedTree:
    """Unit caterpillar with composition (1, 2, 1)."""
    return caterpillar_service.caterpillar_tree(CaterpillarComposition(counts=(1, 2, 1)))


@pytest.fixture
def binary_unrooted() -> TreeClass:
    """The 3-valent class."""
    return TreeClass(tag=TreeClassTag.K_VALENT, k=2)


@pytest.fixture
def binary_rooted() -> TreeClass:
    """The rooted binary class."""
    return TreeClass(tag=TreeClassTag.K_ARY, k=2)
