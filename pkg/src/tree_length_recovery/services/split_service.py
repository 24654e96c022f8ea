"""
Split sequence service.

Down-split sequences encode marked (k+1)-valent combinatorial trees and
up-split sequences encode rooted k-ary combinatorial trees. Both are read
off the length sequence of a depth-first leaf ordering and are decided,
ordered and parsed by the same recursive decomposition.

Down-split (values s_2..s_n). The base case is (1). Otherwise the sequence
splits into k consecutive blocks at indices 1 = t_0 < t_1 < ... < t_k = n,
where for j = 1..k-1

    t_j = min{ t_{j-1} < t < n : k(t - 1) - (k - 1)(s_t - 1) = j }

(for k = 2 this is s_t = 2t - 2). Block j holds s_t - b_{j-1} for
t_{j-1} < t <= t_j, with b_0 = 1 and b_j = s_{t_j}, and every block must be
a down-split sequence itself.

Up-split (values s_1..s_n with s_1 = 0). The base case is (0). Otherwise

    t_1 = max{ 1 <= t < n : k(t - 1) = (k - 1) s_t }
    t_j = min{ t_{j-1} < t < n : k(t - 1) - (k - 1) s_t = j - k },  j = 2..k-1

the prefix s_1..s_{t_1} must be up-split, block 2 holds
s_t - (s_{t_1} + 1) and block j >= 3 holds s_t - s_{t_{j-1}}, each a
down-split sequence.

Orders: down-split sequences compare split indices first (smaller first),
then blocks in order. Up-split sequences prefer the larger first split
index, then smaller later indices, then the prefix, then the blocks.
"""

from functools import cmp_to_key
from itertools import combinations, count
from typing import Iterator, List, Optional, Sequence, Tuple
import logging

from ..core.errors import PreconditionError, TreeParseError
from ..models.schemas import SplitKind, SplitSequence
from ..models.tree import TreeBuilder, WeightedTree
from .tree_service import tree_service

logger = logging.getLogger(__name__)

Values = Tuple[int, ...]


class _Invalid(Exception):
    def __init__(self, position: int, reason: str):
        super().__init__(reason)
        self.position = position
        self.reason = reason


def _cmp(a, b) -> int:
    return (a > b) - (a < b)


class SplitSequenceService:
    """
    Service for validating, ordering and parsing split sequences.

    Example:
        >>> split_service.validate_down_split((2, 4, 5), k=2).split_index
        2
        >>> split_service.compare_down((2, 4, 5), (3, 4, 5), k=2)
        -1
    """

    # Decomposition

    def _down_parts(self, values: Values, k: int, offset: int = 0) -> Tuple[Values, List[Values]]:
        if values == (1,):
            return (), []
        n = len(values) + 1
        if n < 3:
            raise _Invalid(offset, "a single-term down-split sequence must be (1)")

        def s(t: int) -> int:
            return values[t - 2]

        bounds = []
        previous = 1
        for j in range(1, k):
            t = next(
                (t for t in range(previous + 1, n) if k * (t - 1) - (k - 1) * (s(t) - 1) == j),
                None,
            )
            if t is None:
                raise _Invalid(offset + len(values) - 1, f"no splitting index for part {j}")
            bounds.append(t)
            previous = t
        bounds.append(n)

        blocks = []
        base, start = 1, 1
        for t in bounds:
            blocks.append(tuple(s(u) - base for u in range(start + 1, t + 1)))
            base, start = s(t), t
        return tuple(bounds[:-1]), blocks

    def _up_parts(
        self, values: Values, k: int, offset: int = 0
    ) -> Tuple[Values, Values, List[Values]]:
        n = len(values)
        if values[0] != 0:
            raise _Invalid(offset, "an up-split sequence starts with 0")
        if n < 2:
            raise _Invalid(offset, "the single-term up-split sequence is (0)")

        def s(t: int) -> int:
            return values[t - 1]

        first = max(t for t in range(1, n) if k * (t - 1) == (k - 1) * s(t))
        bounds = [first]
        for j in range(2, k):
            t = next(
                (t for t in range(bounds[-1] + 1, n) if k * (t - 1) - (k - 1) * s(t) == j - k),
                None,
            )
            if t is None:
                raise _Invalid(offset + n - 1, f"no splitting index for part {j}")
            bounds.append(t)
        bounds.append(n)

        blocks = []
        base, start = s(first) + 1, first
        for t in bounds[1:]:
            blocks.append(tuple(s(u) - base for u in range(start + 1, t + 1)))
            base, start = s(t), t
        return tuple(bounds[:-1]), values[:first], blocks

    def _check_down(self, values: Values, k: int, offset: int = 0) -> Values:
        bounds, blocks = self._down_parts(values, k, offset)
        starts = (1,) + bounds
        for start, block in zip(starts, blocks):
            self._check_down(block, k, offset + start - 1)
        return bounds

    def _check_up(self, values: Values, k: int, offset: int = 0) -> Values:
        if values == (0,):
            return ()
        bounds, prefix, blocks = self._up_parts(values, k, offset)
        self._check_up(prefix, k, offset)
        for start, block in zip(bounds, blocks):
            self._check_down(block, k, offset + start)
        return bounds

    # Validation

    def validate_down_split(self, values: Sequence[int], k: int = 2) -> SplitSequence:
        """
        Check the recursive down-split definition.

        Raises:
            TreeParseError: With the position (into ``values``) where the
                decomposition failed
        """
        values = tuple(values)
        if not values:
            raise TreeParseError("empty split sequence", 0)
        try:
            bounds = self._check_down(values, k)
        except _Invalid as e:
            raise TreeParseError(f"not a down-split sequence for k={k}: {e.reason}", e.position) from None
        return SplitSequence(kind=SplitKind.DOWN, k=k, values=values, split_indices=bounds)

    def validate_up_split(self, values: Sequence[int], k: int = 2) -> SplitSequence:
        values = tuple(values)
        if not values:
            raise TreeParseError("empty split sequence", 0)
        try:
            bounds = self._check_up(values, k)
        except _Invalid as e:
            raise TreeParseError(f"not an up-split sequence for k={k}: {e.reason}", e.position) from None
        return SplitSequence(kind=SplitKind.UP, k=k, values=values, split_indices=bounds)

    def is_down_split(self, values: Sequence[int], k: int = 2) -> bool:
        try:
            self.validate_down_split(values, k)
        except TreeParseError:
            return False
        return True

    def is_up_split(self, values: Sequence[int], k: int = 2) -> bool:
        try:
            self.validate_up_split(values, k)
        except TreeParseError:
            return False
        return True

    def validate(self, kind: SplitKind, values: Sequence[int], k: int = 2) -> SplitSequence:
        if kind == SplitKind.DOWN:
            return self.validate_down_split(values, k)
        return self.validate_up_split(values, k)

    # Orders

    def compare_down(self, first: Sequence[int], second: Sequence[int], k: int = 2) -> int:
        """-1 if first precedes second, 1 if second precedes first, 0 if equal."""
        first, second = tuple(first), tuple(second)
        self._check_pair(first, second, k, SplitKind.DOWN)
        return self._cmp_down(first, second, k)

    def compare_up(self, first: Sequence[int], second: Sequence[int], k: int = 2) -> int:
        first, second = tuple(first), tuple(second)
        self._check_pair(first, second, k, SplitKind.UP)
        return self._cmp_up(first, second, k)

    def _check_pair(self, first: Values, second: Values, k: int, kind: SplitKind) -> None:
        if len(first) != len(second):
            raise PreconditionError(
                f"compared split sequences differ in length: {len(first)} vs {len(second)}"
            )
        for values in (first, second):
            try:
                self.validate(kind, values, k)
            except TreeParseError as e:
                raise PreconditionError(f"cannot compare: {e.message}") from None

    def _cmp_down(self, first: Values, second: Values, k: int) -> int:
        if first == second:
            return 0
        bounds_a, blocks_a = self._down_parts(first, k)
        bounds_b, blocks_b = self._down_parts(second, k)
        if bounds_a != bounds_b:
            return _cmp(bounds_a, bounds_b)
        for a, b in zip(blocks_a, blocks_b):
            c = self._cmp_down(a, b, k)
            if c:
                return c
        return 0

    def _cmp_up(self, first: Values, second: Values, k: int) -> int:
        if first == second:
            return 0
        bounds_a, prefix_a, blocks_a = self._up_parts(first, k)
        bounds_b, prefix_b, blocks_b = self._up_parts(second, k)
        if bounds_a[0] != bounds_b[0]:
            return -_cmp(bounds_a[0], bounds_b[0])
        if bounds_a[1:] != bounds_b[1:]:
            return _cmp(bounds_a[1:], bounds_b[1:])
        c = self._cmp_up(prefix_a, prefix_b, k)
        if c:
            return c
        for a, b in zip(blocks_a, blocks_b):
            c = self._cmp_down(a, b, k)
            if c:
                return c
        return 0

    def down_key(self, k: int = 2):
        return cmp_to_key(lambda a, b: self._cmp_down(tuple(a), tuple(b), k))

    def up_key(self, k: int = 2):
        return cmp_to_key(lambda a, b: self._cmp_up(tuple(a), tuple(b), k))

    # Parsing

    def parse_down_split(self, values: Sequence[int], k: int = 2) -> WeightedTree:
        """
        Build the marked (k+1)-valent combinatorial tree encoded by a down-split sequence.

        Leaves are labeled y1 (the mark), y2, ... in the order whose length
        sequence is ``values``.

        Raises:
            TreeParseError: If ``values`` is not a down-split sequence
        """
        values = self.validate_down_split(values, k).values
        builder = TreeBuilder()
        names = (f"y{i}" for i in count(1))
        mark = builder.add_vertex(next(names))
        self._attach_down(builder, values, mark, k, names)
        return builder.build(mark="y1")

    def parse_up_split(self, values: Sequence[int], k: int = 2) -> WeightedTree:
        """Build the rooted k-ary combinatorial tree encoded by an up-split sequence."""
        values = self.validate_up_split(values, k).values
        builder = TreeBuilder()
        names = (f"y{i}" for i in count(1))
        root = self._attach_up(builder, values, k, names)
        return builder.build(root=root)

    def _attach_down(
        self, builder: TreeBuilder, values: Values, anchor: int, k: int, names: Iterator[str]
    ) -> None:
        if values == (1,):
            builder.add_edge(anchor, builder.add_vertex(next(names)))
            return
        o = builder.add_vertex()
        builder.add_edge(anchor, o)
        for block in self._down_parts(values, k)[1]:
            self._attach_down(builder, block, o, k, names)

    def _attach_up(self, builder: TreeBuilder, values: Values, k: int, names: Iterator[str]) -> int:
        if values == (0,):
            return builder.add_vertex(next(names))
        _, prefix, blocks = self._up_parts(values, k)
        root = builder.add_vertex()
        builder.add_edge(root, self._attach_up(builder, prefix, k, names))
        for block in blocks:
            self._attach_down(builder, block, root, k, names)
        return root

    # Minimal sequences of a tree

    def min_down_split(self, tree: WeightedTree, label: str, k: Optional[int] = None) -> SplitSequence:
        """
        The minimal down-split sequence of the marked tree (tree, label).

        Computed structurally: at every vertex the k hanging subtrees are
        visited in increasing leaf count, ties broken by their own minimal
        sequences.

        Raises:
            PreconditionError: If the tree is not (k+1)-valent and combinatorial
        """
        k = self._infer_k(tree, k)
        if not tree_service.is_k_valent(tree, k) or not tree_service.is_combinatorial(tree):
            raise PreconditionError(f"min_down_split needs a combinatorial {k + 1}-valent tree")
        v = tree.vertex(label)
        (o,) = tree.adjacency[v]
        _, values = self._min_down(tree, v, o, k)
        return SplitSequence(
            kind=SplitKind.DOWN, k=k, values=values, split_indices=self._check_down(values, k)
        )

    def min_up_split(self, tree: WeightedTree, k: Optional[int] = None) -> SplitSequence:
        if tree.root is None:
            raise PreconditionError("min_up_split needs a rooted tree")
        k = k if k is not None else (tree.degree(tree.root) if len(tree.vertices) > 1 else 2)
        if not tree_service.is_k_ary(tree, k) or not tree_service.is_combinatorial(tree):
            raise PreconditionError(f"min_up_split needs a combinatorial rooted {k}-ary tree")
        _, values = self._min_up(tree, None, tree.root, k)
        return SplitSequence(
            kind=SplitKind.UP, k=k, values=values, split_indices=self._check_up(values, k)
        )

    def split_signature(self, tree: WeightedTree, k: Optional[int] = None) -> SplitSequence:
        """Minimal up-split of a rooted tree, or the smallest minimal down-split over all marks."""
        if tree.root is not None:
            return self.min_up_split(tree, k)
        candidates = [self.min_down_split(tree, label, k) for label in tree.leaf_labels]
        key = self.down_key(candidates[0].k)
        return min(candidates, key=lambda s: key(s.values))

    def _infer_k(self, tree: WeightedTree, k: Optional[int]) -> int:
        if k is not None:
            return k
        widest = max(tree.degree(v) for v in tree.vertices)
        return max(2, widest - 1)

    def _min_down(self, tree: WeightedTree, anchor: int, toward: int, k: int) -> Tuple[int, Values]:
        if tree.is_leaf(toward):
            return 1, (1,)
        parts = [self._min_down(tree, toward, c, k) for c in tree.adjacency[toward] if c != anchor]
        parts.sort(key=cmp_to_key(lambda a, b: _cmp(a[0], b[0]) or self._cmp_down(a[1], b[1], k)))
        values: List[int] = []
        base = 1
        for _, block in parts:
            values.extend(base + x for x in block)
            base = values[-1]
        return sum(size for size, _ in parts), tuple(values)

    def _min_up(self, tree: WeightedTree, parent: Optional[int], v: int, k: int) -> Tuple[int, Values]:
        if tree.is_leaf(v):
            return 1, (0,)
        children = [c for c in tree.adjacency[v] if c != parent]
        ups = {c: self._min_up(tree, v, c, k) for c in children}
        largest = max(size for size, _ in ups.values())
        first = min(
            (c for c in children if ups[c][0] == largest),
            key=lambda c: self.up_key(k)(ups[c][1]),
        )
        rest = [self._min_down(tree, v, c, k) for c in children if c != first]
        rest.sort(key=cmp_to_key(lambda a, b: _cmp(a[0], b[0]) or self._cmp_down(a[1], b[1], k)))
        values = list(ups[first][1])
        base = values[-1] + 1
        for _, block in rest:
            values.extend(base + x for x in block)
            base = values[-1]
        return sum(size for size, _ in ups.values()), tuple(values)

    # Subtree sizes

    def subtree_size_test(self, tree: WeightedTree, labels: Sequence[str], k: int = 2) -> bool:
        """
        Edge-count test for a Steiner subtree being rooted k-ary.

        True iff #E(S) = k/(k-1) (#L(S) - 1), degree-2 vertices kept.
        """
        if not (tree_service.is_k_valent(tree, k) or tree_service.is_k_ary(tree, k)):
            raise PreconditionError(f"subtree_size_test needs a {k + 1}-valent or rooted {k}-ary tree")
        targets = {tree.vertex(label) for label in labels}
        if not targets:
            raise PreconditionError("subtree_size_test needs a nonempty leaf set")
        edge_count = len(tree_service._steiner_edges(tree, targets)) if len(targets) > 1 else 0
        return k * (len(targets) - 1) == (k - 1) * edge_count

    # Enumeration

    def enumerate_down_split(self, length: int, k: int = 2) -> List[Values]:
        """All down-split sequences with ``length`` terms, in increasing order."""
        n = length + 1
        if n == 2:
            return [(1,)]
        if (k * n - k - 1) % (k - 1):
            return []
        last = (k * n - k - 1) // (k - 1)
        found = [
            middle + (last,)
            for middle in combinations(range(1, last), length - 1)
            if self.is_down_split(middle + (last,), k)
        ]
        return sorted(found, key=self.down_key(k))

    def enumerate_up_split(self, length: int, k: int = 2) -> List[Values]:
        if length == 1:
            return [(0,)]
        if (k * (length - 1)) % (k - 1):
            return []
        last = k * (length - 1) // (k - 1)
        found = [
            (0,) + middle + (last,)
            for middle in combinations(range(1, last), length - 2)
            if self.is_up_split((0,) + middle + (last,), k)
        ]
        return sorted(found, key=self.up_key(k))


split_service = SplitSequenceService()
