from fractions import Fraction

from hypothesis import given, settings, strategies as st
import pytest

from tree_length_recovery.core.errors import InfeasibleError, PreconditionError, UnknownLabelError
from tree_length_recovery.models.schemas import TreeClass, TreeClassTag, WeightScheme
from tree_length_recovery.services.classgen_service import classgen_service
from tree_length_recovery.services.isomorphism_service import isomorphism_service
from tree_length_recovery.services.tree_service import TreeService, tree_service
from tree_length_recovery.utils.newick import parse_tree


def test_steiner_length_on_quartet(quartet):
    """Test Steiner lengths of leaf subsets of the unit quartet."""
    assert tree_service.steiner_length(quartet, ["a"]) == 0
    assert tree_service.steiner_length(quartet, ["a", "b"]) == 2
    assert tree_service.steiner_length(quartet, ["a", "c"]) == 3
    assert tree_service.steiner_length(quartet, ["a", "b", "c"]) == 4
    assert tree_service.steiner_length(quartet, quartet.leaf_labels) == 5


def test_steiner_length_unknown_label(quartet):
    """Test that an unknown leaf label is reported by name."""
    with pytest.raises(UnknownLabelError) as exc:
        tree_service.steiner_length(quartet, ["a", "z"])
    assert exc.value.label == "z"


def test_distance_matrix(star3):
    """Test leaf-to-leaf distances of a weighted star."""
    dm = tree_service.distance_matrix(star3)
    assert dm.labels == ("a", "b", "c")
    assert dm.distance("a", "b") == 3
    assert dm.distance("a", "c") == 4
    assert dm.distance("b", "c") == 5
    assert tree_service.leaf_distance(star3, "c", "c") == 0


def test_pair_formula_matches_total_length(quartet, star3):
    """Test the pair formula against direct total lengths, including a degree-4 vertex."""
    four_star = parse_tree("(a:1,b:1,c:1,d:1);")
    mixed = parse_tree("((a:1,b:1,c:1):1/2,d:2,e:3);")
    single = parse_tree("(a:5)b;")
    for tree in (quartet, star3, four_star, mixed, single):
        assert tree_service.total_length_pair_formula(tree) == tree.total_length


def test_pair_formula_needs_two_leaves():
    """Test that a single vertex has no pair formula."""
    with pytest.raises(PreconditionError):
        tree_service.total_length_pair_formula(parse_tree("a;"))


def test_subtree_restriction_suppresses(quartet):
    """Test restriction to three leaves of the quartet."""
    restricted = tree_service.subtree_restriction(quartet, ["a", "b", "c"])
    assert isomorphism_service.is_isomorphic(restricted, parse_tree("(a:1,b:1,c:2);"))
    kept = tree_service.subtree_restriction(quartet, ["a", "b", "c"], suppress=False)
    assert len(kept.vertices) == 5
    assert not tree_service.is_simple(kept)


def test_subtree_restriction_keeps_mark(quartet):
    """Test that the mark survives restriction when its leaf is kept."""
    marked = quartet.with_mark("a")
    assert tree_service.subtree_restriction(marked, ["a", "c"]).mark == "a"
    assert tree_service.subtree_restriction(marked, ["b", "c"]).mark is None


def test_suppress_degree_two():
    """Test merging the two edges around a degree-2 vertex."""
    tree = parse_tree("((a:1,b:1):2,c:3);")
    assert not tree_service.is_simple(tree)
    simple = tree_service.suppress_degree_two(tree)
    assert tree_service.is_simple(simple)
    assert simple.total_length == tree.total_length
    assert isomorphism_service.is_isomorphic(simple, parse_tree("(a:1,b:1,c:5);"))


def test_suppress_degree_two_keeps_root(cherry):
    """Test that a rooted cherry keeps its degree-2 root."""
    assert tree_service.suppress_degree_two(cherry) == cherry


def test_subdivide_edge(star3):
    """Test subdividing an edge keeps its weight and breaks simplicity."""
    center = next(v for v in star3.vertices if not star3.is_leaf(v))
    split = tree_service.subdivide_edge(star3, center, star3.vertex("c"), Fraction(1))
    assert split.total_length == star3.total_length
    assert len(split.vertices) == len(star3.vertices) + 1
    assert not tree_service.is_simple(split)
    assert tree_service.distance_matrix(split) == tree_service.distance_matrix(star3)


def test_subdivide_edge_bounds(star3):
    """Test that the subdivision point must lie inside the edge."""
    center = next(v for v in star3.vertices if not star3.is_leaf(v))
    with pytest.raises(PreconditionError):
        tree_service.subdivide_edge(star3, center, star3.vertex("a"), Fraction(1))
    with pytest.raises(PreconditionError):
        tree_service.subdivide_edge(star3, star3.vertex("a"), star3.vertex("b"), Fraction(1, 2))


def test_structural_predicates(quartet, star3, rooted_triple):
    """Test simple, combinatorial, valent and k-ary predicates."""
    four_star = parse_tree("(a:1,b:1,c:1,d:1);")
    assert tree_service.is_simple(quartet)
    assert tree_service.is_combinatorial(quartet)
    assert not tree_service.is_combinatorial(star3)
    assert tree_service.is_k_valent(quartet, 2)
    assert not tree_service.is_k_valent(four_star, 2)
    assert tree_service.is_k_valent(four_star, 3)
    assert tree_service.is_k_ary(rooted_triple, 2)
    assert not tree_service.is_k_ary(quartet, 2)
    assert not tree_service.is_k_ary(rooted_triple, 3)


def test_is_caterpillar_structural(quartet, caterpillar_121):
    """Test reading the composition of a caterpillar off its path."""
    assert tree_service.is_caterpillar_structural(quartet).counts == (2, 2)
    assert tree_service.is_caterpillar_structural(caterpillar_121).counts == (1, 2, 1)
    branching = parse_tree("((a:1,b:1):1,(c:1,d:1):1,(e:1,f:1):1);")
    assert tree_service.is_caterpillar_structural(branching) is None


def test_is_ultrametric(star3):
    """Test the three-point condition."""
    assert tree_service.is_ultrametric(parse_tree("(a:1,b:1,c:5);"))
    assert not tree_service.is_ultrametric(star3)


def test_is_general_position(quartet, general_position_tree):
    """Test distinct edge-subset sums."""
    assert tree_service.is_general_position(general_position_tree)
    assert not tree_service.is_general_position(quartet)
    assert not tree_service.is_general_position(parse_tree("(a:1,b:2,c:3);"))


def test_is_general_position_cap(quartet):
    """Test that the subset-sum test honors its edge cap."""
    with pytest.raises(InfeasibleError):
        TreeService(max_general_position_edges=3).is_general_position(quartet)


def test_four_point_holds(quartet):
    """Test the four-point condition on a tree metric and on a broken matrix."""
    dm = tree_service.distance_matrix(quartet)
    assert tree_service.four_point_holds(dm)
    rows = [list(row) for row in dm.d]
    rows[0][2] = rows[2][0] = Fraction(5)
    broken = dm.model_construct(labels=dm.labels, d=tuple(tuple(r) for r in rows))
    assert not tree_service.four_point_holds(broken)


def test_farris_transform_is_ultrametric(star3, general_position_tree):
    """Test that the Farris transform yields an ultrametric for valid c."""
    for tree in (star3, general_position_tree):
        for a in tree.vertices:
            reach = max(tree_service.vertex_distances(tree, a).values())
            dm = tree_service.farris_transform(tree, a, reach)
            assert tree_service.is_ultrametric_matrix(dm)


def test_farris_transform_rejects_small_c(star3):
    """Test that c below the farthest leaf distance is rejected."""
    with pytest.raises(PreconditionError):
        tree_service.farris_transform(star3, star3.vertex("a"), 2)


def test_hat_weights(rooted_triple):
    """Test descendant-count weights on a rooted binary tree."""
    hat = tree_service.hat_weights(rooted_triple)
    assert tree_service.leaf_distance(hat, "a", "b") == 2
    assert tree_service.leaf_distance(hat, "a", "c") == 3
    assert tree_service.is_ultrametric(hat)


def test_hat_weights_needs_root(quartet):
    """Test that hat weights refuse an unrooted tree."""
    with pytest.raises(PreconditionError):
        tree_service.hat_weights(quartet)


def test_centers(quartet, star3):
    """Test minimum-eccentricity vertices."""
    internal = sorted(v for v in quartet.vertices if not quartet.is_leaf(v))
    assert tree_service.centers(quartet) == internal
    assert tree_service.centers(star3) == [next(v for v in star3.vertices if not star3.is_leaf(v))]


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10**6), n=st.integers(min_value=2, max_value=7))
def test_random_trees_pair_formula(seed, n):
    """Test the pair formula on seeded random weighted trees."""
    tree = classgen_service.random_tree(
        TreeClass(tag=TreeClassTag.GENERAL_POSITION), n, seed, WeightScheme.GENERAL_POSITION
    )
    assert tree_service.total_length_pair_formula(tree) == tree.total_length
    assert tree_service.steiner_length(tree, tree.leaf_labels) == tree.total_length
