"""
Tests for the tree text format, distribution files, split text and mixture lines.
"""

from fractions import Fraction
import io

from pydantic import ValidationError
import pytest

from tree_length_recovery.core.errors import TreeParseError
from tree_length_recovery.models.schemas import (
    CaterpillarComposition,
    LengthDistribution,
    SplitKind,
    TreeClass,
    TreeClassTag,
    TreeMixture,
)
from tree_length_recovery.models.tree import Edge, WeightedTree
from tree_length_recovery.services.length_service import length_service
from tree_length_recovery.utils.formats import (
    format_mixture,
    format_split_text,
    iter_distribution,
    parse_mixture_lines,
    parse_split_text,
    read_distribution,
    write_distribution,
)
from tree_length_recovery.utils.newick import format_tree, parse_tree
from tree_length_recovery.utils.rational import format_sequence, parse_sequence, to_fraction


class TestTreeText:
    """Tests for parse_tree and format_tree."""

    def test_parse_lengths(self):
        """Test integer, decimal and p/q edge lengths."""
        tree = parse_tree("((a:1,b:0.5):1/3,c:2);")
        assert tree.n_leaves == 3
        assert tree.total_length == Fraction(1) + Fraction(1, 2) + Fraction(1, 3) + 2

    def test_format_is_stable(self):
        """Test that formatting a parsed tree is a fixed point."""
        text = format_tree(parse_tree("((b:2,a:1):1/2,c:3/2);"))
        assert format_tree(parse_tree(text)) == text

    def test_trailers(self):
        """Test mark and root trailers."""
        marked = parse_tree("((a:1,b:1):1,c:1,d:1);@mark=c")
        assert marked.mark == "c"
        assert format_tree(marked).endswith("@mark=c")
        rooted = parse_tree("(a:1,b:1);@root")
        assert rooted.is_rooted
        assert format_tree(rooted) == "(a:1,b:1);@root"

    @pytest.mark.parametrize(
        "text",
        [
            "(a:1,b:1)",
            "(a:1,b);",
            "(a:1,b:x);",
            "(a:1,b:1;",
            "(a:1,b:1);@leaf",
            "(a:1,a:1);",
            "(a:1,b:0);",
            "(a:1,b:-1);",
            "((a:1,b:1)x:1,c:1);",
            "(a:1,b:1);@mark=z",
        ],
    )
    def test_rejects_malformed(self, text):
        """Test that malformed tree text raises a parse error."""
        with pytest.raises(TreeParseError):
            parse_tree(text)

    def test_parse_error_position(self):
        """Test that the failing position is reported."""
        with pytest.raises(TreeParseError) as exc:
            parse_tree("(a:1,b:1]c);")
        assert exc.value.position == 7


class TestModels:
    """Tests for model validation."""

    def test_tree_rejects_cycle(self):
        """Test that an extra edge is rejected."""
        with pytest.raises(ValidationError):
            WeightedTree(
                vertices=(0, 1, 2),
                edges=(
                    Edge(u=0, v=1, weight=1),
                    Edge(u=1, v=2, weight=1),
                    Edge(u=2, v=0, weight=1),
                ),
                labels={0: "a", 2: "b"},
            )

    def test_tree_rejects_mark_and_root(self):
        """Test that a tree cannot be marked and rooted at once."""
        with pytest.raises(ValidationError):
            WeightedTree.model_validate(
                {
                    "vertices": (0, 1, 2, 3),
                    "edges": [{"u": 0, "v": i, "weight": 1} for i in (1, 2, 3)],
                    "labels": {1: "a", 2: "b", 3: "c"},
                    "mark": "a",
                    "root": 0,
                }
            )

    def test_edge_rejects_float(self):
        """Test that floats are not accepted as exact lengths."""
        with pytest.raises(ValidationError):
            Edge(u=0, v=1, weight=0.5)

    def test_distribution_checks_total(self):
        """Test that counts must sum to the total."""
        with pytest.raises(ValidationError):
            LengthDistribution(n=3, total=6, entries={(Fraction(2), Fraction(3)): 5})

    def test_distribution_checks_increasing(self):
        """Test that support sequences must increase."""
        with pytest.raises(ValidationError):
            LengthDistribution(n=3, total=6, entries={(Fraction(3), Fraction(3)): 6})

    def test_composition_canonical(self):
        """Test the canonical orientation of a caterpillar composition."""
        assert CaterpillarComposition(counts=(3, 1, 2)).canonical().counts == (2, 1, 3)
        assert CaterpillarComposition(counts=(1, 2, 1)).same_class(
            CaterpillarComposition(counts=(1, 2, 1)).reversed()
        )
        with pytest.raises(ValidationError):
            CaterpillarComposition(counts=(0, 2, 1))

    def test_tree_class_needs_k(self):
        """Test that k is required exactly for the branching classes."""
        with pytest.raises(ValidationError):
            TreeClass(tag=TreeClassTag.K_VALENT)
        with pytest.raises(ValidationError):
            TreeClass(tag=TreeClassTag.STAR, k=2)
        assert str(TreeClass(tag=TreeClassTag.K_ARY, k=3)) == "k_ary(k=3)"


class TestRationals:
    """Tests for exact rational helpers."""

    def test_to_fraction(self):
        """Test accepted and rejected rational inputs."""
        assert to_fraction("3/4") == Fraction(3, 4)
        assert to_fraction("0.25") == Fraction(1, 4)
        assert to_fraction(2) == Fraction(2)
        for bad in ("", "x", "1/0", 0.5, True):
            with pytest.raises(ValueError):
                to_fraction(bad)

    def test_sequences(self):
        """Test sequence formatting and parsing."""
        values = (Fraction(1, 2), Fraction(3))
        assert format_sequence(values) == "1/2 3"
        assert parse_sequence("1/2 3") == values
        assert parse_sequence("1/2,3", sep=",") == values


class TestDistributionFile:
    """Tests for the distribution file format."""

    def test_write_quartet(self, quartet):
        """Test the exact file content for the unit quartet."""
        out = io.StringIO()
        write_distribution(length_service.exact_distribution(quartet), out)
        assert out.getvalue() == "n=4 total=24\n2 4 5\t8\n3 4 5\t16\n"

    def test_read_back(self, star3):
        """Test that a written distribution reads back equal."""
        dist = length_service.exact_distribution(star3)
        out = io.StringIO()
        write_distribution(dist, out)
        assert read_distribution(io.StringIO(out.getvalue())) == dist

    def test_streaming(self):
        """Test that support lines are yielded lazily after the header."""
        n, total, lines = iter_distribution(io.StringIO("n=3 total=6\n2 3\t6\n"))
        assert (n, total) == (3, 6)
        assert list(lines) == [((Fraction(2), Fraction(3)), 6)]

    @pytest.mark.parametrize(
        "text",
        [
            "",
            "n=3\n2 3\t6\n",
            "n=3 total=6\n2 3 6\n",
            "n=3 total=6\n2 3\t4\n",
            "n=3 total=6\n2 3\t3\n2 3\t3\n",
        ],
    )
    def test_rejects_malformed(self, text):
        """Test malformed distribution files."""
        with pytest.raises(TreeParseError):
            read_distribution(io.StringIO(text))


class TestSplitText:
    """Tests for split sequence text."""

    def test_format_and_parse(self):
        """Test both kinds of split text."""
        assert format_split_text(SplitKind.DOWN, (2, 4, 5), 2) == "d:2,4,5 k=2"
        assert parse_split_text("d:2,4,5 k=2") == (SplitKind.DOWN, (2, 4, 5), 2)
        assert parse_split_text("u:0,2") == (SplitKind.UP, (0, 2), 2)

    @pytest.mark.parametrize("text", ["x:1,2", "d1,2", "d:1,a", "d:1 q=2", "d:1 k=z"])
    def test_rejects_malformed(self, text):
        """Test malformed split text."""
        with pytest.raises(TreeParseError):
            parse_split_text(text)


class TestMixtureLines:
    """Tests for mixture lines."""

    def test_format_and_parse(self):
        """Test mixture lines are sorted by code and read back."""
        mixture = TreeMixture(
            tree_class=TreeClass(tag=TreeClassTag.K_VALENT, k=2),
            n=6,
            weights={"Ub": Fraction(2, 3), "Ua": Fraction(1, 3)},
        )
        text = format_mixture(mixture)
        assert text == "Ua\t1/3\nUb\t2/3\n"
        assert parse_mixture_lines(io.StringIO(text)) == mixture.weights

    def test_rejects_bad_weights(self):
        """Test that a missing tab or a bad weight is a parse error."""
        with pytest.raises(TreeParseError):
            parse_mixture_lines(io.StringIO("Ua 1/3\n"))
        with pytest.raises(TreeParseError):
            parse_mixture_lines(io.StringIO("Ua\tx\n"))
