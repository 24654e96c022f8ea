from fractions import Fraction

import pytest

from tree_length_recovery.core.errors import ClassViolationError, PreconditionError
from tree_length_recovery.models.schemas import CaterpillarComposition, TreeClass, TreeClassTag
from tree_length_recovery.services.caterpillar_service import caterpillar_service
from tree_length_recovery.services.classgen_service import classgen_service
from tree_length_recovery.services.length_service import length_service
from tree_length_recovery.services.tree_service import tree_service
from tree_length_recovery.utils.newick import parse_tree


def composition(*counts):
    return CaterpillarComposition(counts=counts)


def caterpillar_law(comp):
    return length_service.exact_distribution(caterpillar_service.caterpillar_tree(comp))


def test_caterpillar_tree_shape():
    """Test that leaves hang off the path in order."""
    tree = caterpillar_service.caterpillar_tree(composition(2, 1, 3))
    assert tree.n_leaves == 6
    assert tree_service.is_combinatorial(tree)
    assert tree_service.is_caterpillar_structural(tree).same_class(composition(2, 1, 3))
    assert tree_service.leaf_distance(tree, "x1", "x2") == 2
    assert tree_service.leaf_distance(tree, "x1", "x6") == 4


def test_detect_caterpillar(general_position_tree):
    """Test the path length read off the law, and rejection of other laws."""
    assert caterpillar_service.detect_caterpillar(caterpillar_law(composition(2, 1, 3))) == 2
    assert caterpillar_service.detect_caterpillar(caterpillar_law(composition(4,))) == 0
    assert caterpillar_service.detect_caterpillar(
        length_service.exact_distribution(general_position_tree)
    ) is None
    assert caterpillar_service.detect_caterpillar(
        length_service.exact_distribution(parse_tree("(a:1/2,b:1,c:1);"))
    ) is None


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6, 7])
def test_detection_matches_shape(n):
    """Test that the law flags a caterpillar exactly when the tree is one."""
    simple = TreeClass(tag=TreeClassTag.SIMPLE_COMBINATORIAL)
    for tree in classgen_service.enumerate_class(simple, n).items:
        detected = caterpillar_service.detect_caterpillar(length_service.exact_distribution(tree))
        shape = tree_service.is_caterpillar_structural(tree)
        assert (detected is None) == (shape is None)
        if shape is not None:
            assert detected == shape.path_length


def test_end_pair_probability():
    """Test P{K_2 = l} = 2 n_0 n_l / (n(n-1)) on a large caterpillar."""
    stats = caterpillar_service.caterpillar_statistics(composition(2, 11, 12))
    assert stats.n == 25
    assert stats.pair_probs[2] == Fraction(2, 25)
    assert stats.autocorrelation == {0: 4 + 121 + 144, 1: 22 + 132, 2: 24}


@pytest.mark.parametrize("counts", [(2, 1, 3), (1, 2, 1), (1, 0, 2), (3, 1), (1, 1, 1, 2), (4,)])
def test_statistics_match_distribution(counts):
    """Test the closed forms against the statistics read off the exact law."""
    comp = composition(*counts)
    closed = caterpillar_service.caterpillar_statistics(comp)
    observed = caterpillar_service.statistics_from_distribution(
        caterpillar_law(comp), comp.path_length
    )
    assert observed == closed


@pytest.mark.parametrize("counts", [(2, 1, 3), (1, 2, 1), (1, 0, 2), (3, 1), (1, 1, 1, 2), (1, 1)])
def test_reconstruct_caterpillar(counts):
    """Test recovery of the composition up to reversal."""
    comp = composition(*counts)
    recovered = caterpillar_service.reconstruct_caterpillar(caterpillar_law(comp))
    assert recovered.same_class(comp)
    assert recovered == recovered.canonical()


def test_reconstruct_rejects_non_caterpillar(general_position_tree):
    """Test that a weighted law fails detection."""
    with pytest.raises(ClassViolationError) as exc:
        caterpillar_service.reconstruct_caterpillar(
            length_service.exact_distribution(general_position_tree)
        )
    assert exc.value.step == "detect"


def test_compositions():
    """Test enumeration of composition classes within a budget."""
    found = [c.counts for c in caterpillar_service.compositions(3, 5)]
    assert found == [(3,), (1, 2), (1, 0, 2), (1, 1, 1)]
    with pytest.raises(PreconditionError):
        caterpillar_service.compositions(1, 5)
