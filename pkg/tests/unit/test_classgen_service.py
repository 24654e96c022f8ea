import io

import pytest

from tree_length_recovery.core.errors import InfeasibleError, PreconditionError
from tree_length_recovery.models.schemas import TreeClass, TreeClassTag, WeightScheme
from tree_length_recovery.services.classgen_service import (
    ClassGenerationService,
    classgen_service,
)
from tree_length_recovery.services.isomorphism_service import isomorphism_service
from tree_length_recovery.services.length_service import length_service
from tree_length_recovery.services.reconstruction_service import same_law
from tree_length_recovery.utils.newick import parse_tree
from tree_length_recovery.utils.splitmix import SplitMix64


class TestEnumeration:
    """Tests for exhaustive class enumeration."""

    @pytest.mark.parametrize("n, expected", [(2, 1), (3, 1), (4, 2), (5, 3), (6, 7), (7, 13)])
    def test_simple_combinatorial_counts(self, n, expected):
        """Test the number of series-reduced unrooted trees."""
        tree_class = TreeClass(tag=TreeClassTag.SIMPLE_COMBINATORIAL)
        assert len(classgen_service.enumerate_class(tree_class, n).items) == expected

    @pytest.mark.parametrize("n, expected", [(4, 1), (5, 1), (6, 2), (7, 2), (8, 4)])
    def test_binary_unrooted_counts(self, binary_unrooted, n, expected):
        """Test the number of 3-valent trees."""
        assert len(classgen_service.enumerate_class(binary_unrooted, n).items) == expected

    @pytest.mark.parametrize(
        "n, expected", [(1, 1), (2, 1), (3, 1), (4, 2), (5, 3), (6, 6), (7, 11), (8, 23)]
    )
    def test_binary_rooted_counts(self, binary_rooted, n, expected):
        """Test the number of rooted binary trees."""
        enumeration = classgen_service.enumerate_class(binary_rooted, n)
        assert len(enumeration.items) == expected
        assert all(tree.is_rooted for tree in enumeration.items)

    def test_impossible_leaf_count(self):
        """Test that 4-valent trees with an odd leaf count do not exist."""
        four_valent = TreeClass(tag=TreeClassTag.K_VALENT, k=3)
        assert classgen_service.enumerate_class(four_valent, 5).items == ()
        assert len(classgen_service.enumerate_class(four_valent, 6).items) == 1

    def test_caterpillar_budget(self):
        """Test caterpillar enumeration within n + l."""
        service = ClassGenerationService(caterpillar_budget=5)
        enumeration = service.enumerate_class(TreeClass(tag=TreeClassTag.CATERPILLAR), 3)
        assert len(enumeration.items) == 4

    def test_codes_are_sorted_and_distinct(self, binary_unrooted):
        """Test that enumerations list one tree per canonical code."""
        enumeration = classgen_service.enumerate_class(binary_unrooted, 8)
        assert list(enumeration.codes) == sorted(set(enumeration.codes))
        for code, tree in zip(enumeration.codes, enumeration.items):
            assert isomorphism_service.canonical_code(tree).code == code
            assert classgen_service.belongs_to(tree, binary_unrooted)

    def test_enumeration_limits(self, binary_unrooted):
        """Test non-enumerable classes and the leaf cap."""
        with pytest.raises(PreconditionError):
            classgen_service.enumerate_class(TreeClass(tag=TreeClassTag.STAR), 4)
        with pytest.raises(InfeasibleError):
            ClassGenerationService(max_enumeration_leaves=5).enumerate_class(binary_unrooted, 6)

    def test_dump_corpus(self, binary_rooted):
        """Test that the corpus is one parseable tree per line."""
        enumeration = classgen_service.enumerate_class(binary_rooted, 5)
        out = io.StringIO()
        classgen_service.dump_corpus(enumeration, out)
        lines = out.getvalue().splitlines()
        assert len(lines) == 3
        for line, tree in zip(lines, enumeration.items):
            assert line.endswith("@root")
            assert isomorphism_service.is_isomorphic(parse_tree(line), tree)


class TestRandomTrees:
    """Tests for seeded random class members."""

    @pytest.mark.parametrize(
        "tree_class, scheme, n",
        [
            (TreeClass(tag=TreeClassTag.STAR), WeightScheme.RANDOM_RATIONAL, 5),
            (TreeClass(tag=TreeClassTag.SMALL_N), WeightScheme.UNIT, 4),
            (TreeClass(tag=TreeClassTag.GENERAL_POSITION), WeightScheme.GENERAL_POSITION, 6),
            (TreeClass(tag=TreeClassTag.ULTRAMETRIC), WeightScheme.ULTRAMETRIC, 6),
            (TreeClass(tag=TreeClassTag.CATERPILLAR), WeightScheme.UNIT, 6),
            (TreeClass(tag=TreeClassTag.K_VALENT, k=2), WeightScheme.UNIT, 7),
            (TreeClass(tag=TreeClassTag.K_VALENT, k=3), WeightScheme.UNIT, 8),
            (TreeClass(tag=TreeClassTag.K_ARY, k=2), WeightScheme.UNIT, 6),
            (TreeClass(tag=TreeClassTag.SIMPLE_COMBINATORIAL), WeightScheme.UNIT, 7),
        ],
    )
    def test_members_and_determinism(self, tree_class, scheme, n):
        """Test that the same seed gives the same member of the class."""
        for seed in range(5):
            tree = classgen_service.random_tree(tree_class, n, seed, scheme)
            assert tree.n_leaves == n
            assert classgen_service.belongs_to(tree, tree_class)
            assert classgen_service.random_tree(tree_class, n, seed, scheme) == tree

    def test_scheme_must_fit_class(self):
        """Test that a weight scheme outside the class is refused."""
        with pytest.raises(PreconditionError):
            classgen_service.random_tree(
                TreeClass(tag=TreeClassTag.GENERAL_POSITION), 5, 0, WeightScheme.UNIT
            )
        with pytest.raises(PreconditionError):
            classgen_service.random_tree(TreeClass(tag=TreeClassTag.SMALL_N), 5, 0)
        with pytest.raises(PreconditionError):
            classgen_service.random_tree(TreeClass(tag=TreeClassTag.K_VALENT, k=3), 5, 0)


class TestOracles:
    """Tests for witnesses and the injectivity oracle."""

    def test_subdivision_witness(self):
        """Test that subdividing an edge keeps the law but changes the tree."""
        star, subdivided = classgen_service.subdivision_witness()
        assert not isomorphism_service.is_isomorphic(star, subdivided)
        assert same_law(
            length_service.exact_distribution(star), length_service.exact_distribution(subdivided)
        )

    def test_known_witnesses(self):
        """Test the reported collisions."""
        reports = {(r.name, r.statistic): r for r in classgen_service.known_witnesses()}
        subdivision = reports[("subdivision", "length_distribution")]
        assert subdivision.statistic_collides and not subdivision.isomorphic
        pairs = reports[("caterpillar_pair", "pairwise_distance_multiset")]
        triples = reports[("caterpillar_pair", "triple_length_multiset")]
        assert pairs.statistic_collides
        assert not triples.statistic_collides
        assert pairs.first == "(2,11,12)"
        assert not pairs.isomorphic

    @pytest.mark.parametrize("n", [4, 6, 8])
    def test_injectivity_binary(self, binary_unrooted, n):
        """Test that 3-valent laws separate all types."""
        report = classgen_service.injectivity_oracle(binary_unrooted, n)
        assert report.injective
        assert report.collisions == []
        assert report.type_count == len(classgen_service.enumerate_class(binary_unrooted, n).items)

    def test_injectivity_hat_signature(self):
        """Test that hat signatures separate simple combinatorial trees."""
        report = classgen_service.injectivity_oracle(
            TreeClass(tag=TreeClassTag.COMBINATORIAL_HAT), 6
        )
        assert report.type_count == 7
        assert report.injective


class TestSplitMix:
    """Tests for the seeded generator."""

    def test_reference_stream(self):
        """Test the first outputs for seed 0."""
        rng = SplitMix64(0)
        assert rng.next() == 0xE220A8397B1DCDAF
        assert rng.next() == 0x6E789E6AA1B965F4
        assert rng.next() == 0x06C45D188009454F

    def test_bounded_draws(self):
        """Test bounded draws, shuffles and rationals."""
        rng = SplitMix64(7)
        assert all(0 <= rng.below(5) < 5 for _ in range(50))
        assert sorted(rng.shuffled(range(10))) == list(range(10))
        value = rng.rational()
        assert 1 <= value.numerator <= 9 and 1 <= value.denominator <= 4
        with pytest.raises(ValueError):
            rng.below(0)
