"""
Tests for canonical codes and tree isomorphism.
"""

import pytest

from tree_length_recovery.models.schemas import CaterpillarComposition, TreeClass, TreeClassTag
from tree_length_recovery.models.tree import Edge, WeightedTree
from tree_length_recovery.services.caterpillar_service import caterpillar_service
from tree_length_recovery.services.classgen_service import classgen_service
from tree_length_recovery.services.isomorphism_service import isomorphism_service
from tree_length_recovery.utils.newick import parse_tree
from tree_length_recovery.utils.splitmix import SplitMix64

SIMPLE = TreeClass(tag=TreeClassTag.SIMPLE_COMBINATORIAL)


def relabeled(tree: WeightedTree, seed: int) -> WeightedTree:
    """Copy of the tree with shuffled vertex ids, renamed leaves and flipped edge ends."""
    rng = SplitMix64(seed)
    ids = rng.shuffled([100 + i for i in range(len(tree.vertices))])
    new_id = dict(zip(tree.vertices, ids))
    names = rng.shuffled([f"z{i}" for i in range(tree.n_leaves)])
    new_name = dict(zip(sorted(tree.labels.values()), names))
    edges = []
    for e in rng.shuffled(list(tree.edges)):
        u, v = new_id[e.u], new_id[e.v]
        if rng.below(2):
            u, v = v, u
        edges.append(Edge(u=u, v=v, weight=e.weight))
    return WeightedTree(
        vertices=tuple(rng.shuffled([new_id[v] for v in tree.vertices])),
        edges=tuple(edges),
        labels={new_id[v]: new_name[label] for v, label in tree.labels.items()},
        mark=new_name[tree.mark] if tree.mark is not None else None,
        root=new_id[tree.root] if tree.root is not None else None,
    )


class TestCanonicalCode:
    """Tests for codes under relabeling."""

    @pytest.mark.parametrize("seed", range(5))
    def test_invariant_under_vertex_permutation(self, general_position_tree, rooted_triple, seed):
        """Test that vertex ids and leaf names do not change the code."""
        for tree in (
            general_position_tree,
            rooted_triple,
            general_position_tree.with_mark("c"),
        ):
            copy = relabeled(tree, seed)
            assert isomorphism_service.canonical_code(copy) == isomorphism_service.canonical_code(
                tree
            )

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6, 7])
    def test_codes_separate_enumerated_trees(self, n):
        """Test that a relabeled copy is isomorphic to its own type and to no other."""
        trees = classgen_service.enumerate_class(SIMPLE, n).items
        for i, tree in enumerate(trees):
            copy = relabeled(tree, seed=i)
            for j, other in enumerate(trees):
                assert isomorphism_service.is_isomorphic(copy, other) == (i == j)

    def test_weights_matter(self):
        """Test that equal shapes with different lengths are not isomorphic."""
        assert not isomorphism_service.is_isomorphic(
            parse_tree("(a:1,b:2,c:3);"), parse_tree("(a:1,b:2,c:4);")
        )
        assert isomorphism_service.is_isomorphic(
            parse_tree("(a:1,b:2,c:3);"), parse_tree("(x:3,y:1,z:2);")
        )


class TestMarksAndRoots:
    """Tests for codes of marked and rooted trees."""

    def test_mark_position_matters(self):
        """Test that a caterpillar marked at an end leaf differs from one marked in the middle."""
        tree = caterpillar_service.caterpillar_tree(CaterpillarComposition(counts=(2, 1, 2)))
        end = tree.with_mark("x1")
        assert isomorphism_service.is_isomorphic(end, tree.with_mark("x5"))
        assert not isomorphism_service.is_isomorphic(end, tree.with_mark("x3"))

    def test_mark_and_root_change_the_type(self, quartet):
        """Test that plain, marked and rooted versions of a tree are pairwise distinct."""
        inner = next(v for v in quartet.vertices if not quartet.is_leaf(v))
        versions = [quartet, quartet.with_mark("a"), quartet.with_root(inner)]
        codes = {isomorphism_service.canonical_code(t).code for t in versions}
        assert len(codes) == 3
        assert [code[0] for code in sorted(codes)] == ["M", "R", "U"]

    def test_root_position_matters(self, general_position_tree):
        """Test that different roots of a tree with distinct lengths give distinct types."""
        tree = general_position_tree
        rooted = [tree.with_root(v) for v in tree.vertices if not tree.is_leaf(v)]
        assert len(rooted) == 3
        codes = {isomorphism_service.canonical_code(t).code for t in rooted}
        assert len(codes) == 3

    def test_symmetric_roots(self, quartet):
        """Test that the two internal vertices of the unit quartet give the same rooted type."""
        first, second = [v for v in quartet.vertices if not quartet.is_leaf(v)]
        assert isomorphism_service.is_isomorphic(
            quartet.with_root(first), quartet.with_root(second)
        )
