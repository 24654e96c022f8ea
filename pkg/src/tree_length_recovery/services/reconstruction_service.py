"""
Reconstruction service.

Recovers a tree, up to isomorphism, from the exact law of its random length
sequence, given the class the tree is known to belong to. Every
reconstructor consumes a LengthDistribution (or its lexicographic minimum)
and never a tree, and reports the step at which its class assumption
failed.

Reconstructed trees label their leaves x1, x2, ... .
"""

from collections import defaultdict
from fractions import Fraction
from itertools import combinations
from math import comb, factorial, perm
from typing import Dict, List, Optional, Sequence, Tuple
import logging

from ..core.errors import (
    ClassViolationError,
    NotATreeMetricError,
    PreconditionError,
)
from ..models.schemas import (
    Constraint,
    LengthDistribution,
    LengthSequence,
    UltrametricDiagnostics,
)
from ..models.tree import DistanceMatrix, TreeBuilder, WeightedTree
from .isomorphism_service import isomorphism_service
from .length_service import length_service
from .split_service import split_service
from .tree_service import rooted_order, tree_service

logger = logging.getLogger(__name__)

Adjacency = Dict[int, Dict[int, Fraction]]


def _link(adjacency: Adjacency, u: int, v: int, w: Fraction) -> None:
    adjacency[u][v] = w
    adjacency[v][u] = w


def _unlink(adjacency: Adjacency, u: int, v: int) -> None:
    del adjacency[u][v]
    del adjacency[v][u]


def _build(adjacency: Adjacency, labels: Dict[int, str]) -> WeightedTree:
    builder = TreeBuilder()
    ids = {v: builder.add_vertex(labels.get(v)) for v in sorted(adjacency)}
    for u in sorted(adjacency):
        for v, w in sorted(adjacency[u].items()):
            if u < v:
                builder.add_edge(ids[u], ids[v], w)
    return builder.build()


def same_law(first: LengthDistribution, second: LengthDistribution) -> bool:
    """Equal probabilities on equal supports, whatever the two count totals."""
    if first.n != second.n or first.entries.keys() != second.entries.keys():
        return False
    return all(
        count * second.total == second.entries[seq] * first.total
        for seq, count in first.entries.items()
    )


def star_tree(weights: Sequence[Fraction]) -> WeightedTree:
    """Star with one leaf per weight, leaves x1, x2, ... in the given order."""
    builder = TreeBuilder()
    if len(weights) == 1:
        builder.add_vertex("x1")
        return builder.build()
    center = builder.add_vertex()
    for i, w in enumerate(weights, start=1):
        builder.add_edge(center, builder.add_vertex(f"x{i}"), w)
    return builder.build()


def single_edge(weight: Fraction) -> WeightedTree:
    builder = TreeBuilder()
    builder.add_edge(builder.add_vertex("x1"), builder.add_vertex("x2"), weight)
    return builder.build()


class ReconstructionService:
    """
    Service for inverting the map from trees to length-sequence laws.

    Example:
        >>> dist = length_service.exact_distribution(star)
        >>> isomorphism_service.is_isomorphic(reconstruction_service.reconstruct_star(dist), star)
        True
    """

    # Pendant lengths

    def pendant_lengths(self, dist: LengthDistribution) -> List[Fraction]:
        """
        The multiset of pendant edge lengths, read from the law of W_n - W_{n-1}.

        The last sampled leaf is uniform, so each pendant length carries mass 1/n.
        """
        law = length_service.pendant_increment_law(dist)
        lengths: List[Fraction] = []
        for value, p in law.items():
            copies = p * dist.n
            if copies.denominator != 1:
                raise ClassViolationError(
                    "pendant-lengths", f"P{{W_n - W_n-1 = {value}}} = {p} is not a multiple of 1/{dist.n}"
                )
            lengths.extend([value] * int(copies))
        return sorted(lengths)

    def _constant_total(self, dist: LengthDistribution, step: str) -> Fraction:
        totals = {seq[-1] for seq in dist.entries}
        if len(totals) != 1:
            raise ClassViolationError(step, "W_n is not almost surely constant")
        return totals.pop()

    # Stars and small trees

    def reconstruct_star(self, dist: LengthDistribution) -> WeightedTree:
        """
        Rebuild a star from the law of its last increment.

        Raises:
            ClassViolationError: If the pendant lengths do not add up to W_n
        """
        if dist.n < 2:
            raise PreconditionError("reconstruction needs at least two leaves")
        if dist.n == 2:
            return single_edge(self._constant_total(dist, "total-length"))
        total = self._constant_total(dist, "total-length")
        lengths = self.pendant_lengths(dist)
        if sum(lengths) != total:
            raise ClassViolationError(
                "pendant-sum", f"pendant lengths sum to {sum(lengths)} but W_n = {total}"
            )
        logger.debug(f"star pendants: {[str(w) for w in lengths]}")
        return star_tree(lengths)

    def reconstruct_small_n(self, dist: LengthDistribution) -> WeightedTree:
        """
        Rebuild a simple tree with at most four leaves.

        With four leaves the pendant lengths come from W_4 - W_3. The tree is
        a star when they add up to W_4; otherwise the internal edge is
        e = W_4 - (sum of pendants), and the pairing of pendants into the two
        cherries is the one whose predicted law of W_2 matches the observed
        one. The chosen tree is checked against the whole distribution.

        Raises:
            ClassViolationError: If no pairing (or more than one) fits
        """
        if not 2 <= dist.n <= 4:
            raise PreconditionError(f"small-n reconstruction handles 2 to 4 leaves, got {dist.n}")
        if dist.n < 4:
            return self.reconstruct_star(dist)

        total = self._constant_total(dist, "total-length")
        pendants = self.pendant_lengths(dist)
        internal = total - sum(pendants)
        if internal == 0:
            return self.reconstruct_star(dist)
        if internal < 0:
            raise ClassViolationError(
                "internal-edge", f"pendant lengths exceed the total length {total}"
            )
        logger.debug(f"quartet pendants {[str(w) for w in pendants]}, internal edge {internal}")

        observed = length_service.marginal(dist, 2)
        fitting: Dict[str, WeightedTree] = {}
        for left, right in (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))):
            if self._quartet_w2_law(pendants, left, right, internal) == observed:
                candidate = self._quartet(pendants, left, right, internal)
                fitting[isomorphism_service.canonical_code(candidate).code] = candidate
        if len(fitting) != 1:
            raise ClassViolationError(
                "pairing",
                f"{len(fitting)} cherry pairings fit the law of W_2 "
                f"(pendant pattern {self._pendant_pattern(pendants)})",
            )
        (tree,) = fitting.values()
        if not same_law(length_service.exact_distribution(tree), dist):
            raise ClassViolationError("verification", "the fitted quartet has a different distribution")
        return tree

    def _pendant_pattern(self, pendants: Sequence[Fraction]) -> str:
        names: Dict[Fraction, str] = {}
        for w in pendants:
            names.setdefault(w, "abcd"[len(names)])
        return "".join(names[w] for w in pendants)

    def _quartet_w2_law(
        self,
        pendants: Sequence[Fraction],
        left: Tuple[int, int],
        right: Tuple[int, int],
        internal: Fraction,
    ) -> Dict[Fraction, Fraction]:
        cherries = {frozenset(left), frozenset(right)}
        law: Dict[Fraction, Fraction] = defaultdict(Fraction)
        for i, j in combinations(range(4), 2):
            d = pendants[i] + pendants[j]
            if frozenset((i, j)) not in cherries:
                d += internal
            law[d] += Fraction(1, 6)
        return dict(sorted(law.items()))

    def _quartet(
        self,
        pendants: Sequence[Fraction],
        left: Tuple[int, int],
        right: Tuple[int, int],
        internal: Fraction,
    ) -> WeightedTree:
        builder = TreeBuilder()
        hubs = (builder.add_vertex(), builder.add_vertex())
        builder.add_edge(hubs[0], hubs[1], internal)
        for hub, pair in zip(hubs, (left, right)):
            for i in pair:
                builder.add_edge(hub, builder.add_vertex(f"x{i + 1}"), pendants[i])
        return builder.build()

    # General position

    def recover_distance_matrix(self, dist: LengthDistribution) -> DistanceMatrix:
        """
        Leaf-to-leaf distances of a tree in general position.

        Steps: the n pendant lengths C from the last increment; a cherry
        (l', l'') with P{W_2 = l' + l''} > 0; the n - 2 distances D from the
        cherry to the other leaves, from W_3 - W_2 given W_2 = l' + l''; and
        for every further value of W_4 - W_2 the two equally likely orders of
        a leaf pair, which give its distance.

        Raises:
            ClassViolationError: Naming the step whose uniqueness assumption failed
        """
        n = dist.n
        if n < 4:
            tree = self.reconstruct_small_n(dist)
            return tree_service.distance_matrix(tree)

        pendant_law = length_service.pendant_increment_law(dist)
        if len(pendant_law) != n or any(p != Fraction(1, n) for p in pendant_law.values()):
            raise ClassViolationError(
                "pendant-lengths", f"expected {n} distinct pendant lengths, found {len(pendant_law)}"
            )
        pendants = sorted(pendant_law)

        w2 = length_service.marginal(dist, 2)
        cherry = next(
            ((a, b) for a, b in combinations(pendants, 2) if w2.get(a + b, 0) > 0), None
        )
        if cherry is None:
            raise ClassViolationError("sibling-pair", "no pendant pair sum is a value of W_2")
        first, second = cherry
        if w2[first + second] != Fraction(1, comb(n, 2)):
            raise ClassViolationError(
                "sibling-pair",
                f"P{{W_2 = {first + second}}} = {w2[first + second]}, expected 1/{comb(n, 2)}",
            )
        given_cherry = length_service.conditional(
            dist, [Constraint(index=2, value=first + second)]
        )

        reach = length_service.increment_law(given_cherry, 3)
        if len(reach) != n - 2 or any(p != Fraction(1, n - 2) for p in reach.values()):
            raise ClassViolationError(
                "cherry-distances", f"expected {n - 2} equiprobable values of W_3 - W_2"
            )
        others = sorted(reach)
        position = {delta: i + 2 for i, delta in enumerate(others)}
        logger.debug(f"cherry ({first}, {second}), distances to the rest {[str(x) for x in others]}")

        d = [[Fraction(0)] * n for _ in range(n)]
        d[0][1] = d[1][0] = first + second
        for delta, k in position.items():
            d[0][k] = d[k][0] = first + delta
            d[1][k] = d[k][1] = second + delta

        spans: Dict[Fraction, Dict[Tuple[Fraction, Fraction], int]] = defaultdict(lambda: defaultdict(int))
        for seq, count in given_cherry.entries.items():
            low, mid, high = seq[0], seq[1], seq[2]
            spans[high - low][(mid - low, high - mid)] += count
        if len(spans) != comb(n - 2, 2):
            raise ClassViolationError(
                "pair-spans", f"expected {comb(n - 2, 2)} values of W_4 - W_2, found {len(spans)}"
            )
        filled = set()
        for span, orders in spans.items():
            if len(orders) != 2 or len(set(orders.values())) != 1:
                raise ClassViolationError(
                    "pair-spans", f"W_4 - W_2 = {span} does not split into two equally likely orders"
                )
            (p1, q1), (p2, q2) = sorted(orders)
            if p1 not in position or p2 not in position:
                raise ClassViolationError("pair-spans", f"W_4 - W_2 = {span} names an unknown leaf")
            branch = p2 - q1
            distance = p1 + p2 - 2 * branch
            if branch < 0 or distance != q1 + q2:
                raise ClassViolationError("pair-spans", f"inconsistent orders for W_4 - W_2 = {span}")
            i, j = position[p1], position[p2]
            d[i][j] = d[j][i] = distance
            filled.add((i, j))
        if len(filled) != comb(n - 2, 2):
            raise ClassViolationError("pair-spans", "two leaf pairs share a span")

        labels = tuple(f"x{i}" for i in range(1, n + 1))
        return DistanceMatrix(labels=labels, d=tuple(tuple(row) for row in d))

    def reconstruct_general_position(self, dist: LengthDistribution) -> WeightedTree:
        if dist.n < 4:
            return self.reconstruct_small_n(dist)
        dm = self.recover_distance_matrix(dist)
        try:
            return self.tree_from_distances(dm)
        except NotATreeMetricError as e:
            raise ClassViolationError(e.step, e.reason) from e

    def tree_from_distances(self, dm: DistanceMatrix) -> WeightedTree:
        """
        The simple tree realizing a tree metric, built by inserting leaves one at a time.

        Each new leaf x hangs off the current tree at distance
        max_b (x | b)_a from the first leaf a along the path to the maximizing b,
        where (x | b)_a is the Gromov product.

        Raises:
            NotATreeMetricError: If the matrix is not a tree metric with
                positive pendant lengths
        """
        labels = dm.labels
        size = len(labels)
        if size == 1:
            builder = TreeBuilder()
            builder.add_vertex(labels[0])
            return builder.build()
        if not tree_service.four_point_holds(dm):
            raise NotATreeMetricError("the four-point condition fails")

        d = dm.d
        adjacency: Adjacency = defaultdict(dict)
        leaf_vertex = {0: 0, 1: 1}
        _link(adjacency, 0, 1, d[0][1])
        next_id = 2
        for i in range(2, size):
            gap, b = max(((d[0][i] + d[0][b] - d[i][b]) / 2, b) for b in leaf_vertex if b != 0)
            pendant = d[0][i] - gap
            if gap <= 0 or pendant <= 0:
                raise NotATreeMetricError(f"leaf {labels[i]!r} would not be a leaf")
            walk = self._path(adjacency, leaf_vertex[0], leaf_vertex[b])
            target = None
            travelled = Fraction(0)
            for p, q in zip(walk, walk[1:]):
                w = adjacency[p][q]
                if travelled + w == gap:
                    target = q
                    break
                if travelled + w > gap:
                    target = next_id
                    next_id += 1
                    _unlink(adjacency, p, q)
                    _link(adjacency, p, target, gap - travelled)
                    _link(adjacency, target, q, travelled + w - gap)
                    break
                travelled += w
            if target is None or target in leaf_vertex.values():
                raise NotATreeMetricError(f"leaf {labels[i]!r} lands on another leaf")
            leaf_vertex[i] = next_id
            _link(adjacency, target, next_id, pendant)
            next_id += 1

        tree = _build(adjacency, {v: labels[i] for i, v in leaf_vertex.items()})
        for i, j in combinations(range(size), 2):
            if tree_service.leaf_distance(tree, labels[i], labels[j]) != d[i][j]:
                raise NotATreeMetricError(
                    f"no tree realizes d({labels[i]}, {labels[j]}) = {d[i][j]}"
                )
        return tree

    def _path(self, adjacency: Adjacency, u: int, v: int) -> List[int]:
        _, parent = rooted_order(adjacency, u)
        walk = [v]
        while walk[-1] != u:
            walk.append(parent[walk[-1]])
        return walk[::-1]

    # Ultrametric trees

    def reconstruct_ultrametric(self, minseq: LengthSequence) -> WeightedTree:
        """
        Rebuild an ultrametric tree from the lexicographic minimum of its length sequences.

        Leaves are added in the order of the minimal sequence. With current
        height h and increment d = l_{k+1} - l_k, the new leaf joins through a
        new root at height (d + h) / 2 if d > h, at the current root if
        d = h, and otherwise at height d on the path from the root down to
        the previous leaf.

        Raises:
            ClassViolationError: If the sequence is not strictly increasing
                and positive
        """
        seq = tuple(Fraction(x) for x in minseq)
        if not seq:
            raise PreconditionError("an ultrametric rebuild needs at least two leaves")
        previous = Fraction(0)
        for x in seq:
            if x <= previous:
                raise ClassViolationError("input", f"sequence {[str(v) for v in seq]} is not increasing")
            previous = x

        adjacency: Adjacency = defaultdict(dict)
        height: Dict[int, Fraction] = {0: Fraction(0), 1: Fraction(0)}
        parent: Dict[int, Optional[int]] = {}
        root = 2
        height[root] = seq[0] / 2
        for leaf in (0, 1):
            _link(adjacency, root, leaf, height[root])
            parent[leaf] = root
        parent[root] = None
        leaves = [0, 1]
        next_id = 3

        for step in (b - a for a, b in zip(seq, seq[1:])):
            new = next_id
            next_id += 1
            height[new] = Fraction(0)
            if step > height[root]:
                top = next_id
                next_id += 1
                height[top] = (step + height[root]) / 2
                _link(adjacency, top, root, height[top] - height[root])
                parent[root], parent[top] = top, None
                root = top
                anchor = top
            elif step == height[root]:
                anchor = root
            else:
                child = leaves[-1]
                while height[parent[child]] < step:
                    child = parent[child]
                above = parent[child]
                if height[above] == step:
                    anchor = above
                else:
                    anchor = next_id
                    next_id += 1
                    height[anchor] = step
                    _unlink(adjacency, above, child)
                    _link(adjacency, above, anchor, height[above] - step)
                    _link(adjacency, anchor, child, step - height[child])
                    parent[anchor], parent[child] = above, anchor
            _link(adjacency, anchor, new, height[anchor])
            parent[new] = anchor
            leaves.append(new)

        labels = {v: f"x{i}" for i, v in enumerate(leaves, start=1)}
        return tree_service.suppress_degree_two(_build(adjacency, labels))

    def reconstruct_ultrametric_from_distribution(self, dist: LengthDistribution) -> WeightedTree:
        return self.reconstruct_ultrametric(length_service.min_lex(dist))

    def ultrametric_necessary_condition(self, dist: LengthDistribution) -> bool:
        """
        Rebuild from the minimum and compare the rebuilt tree's law with ``dist``.

        Every ultrametric tree passes; a failure proves the source was not ultrametric.
        """
        try:
            rebuilt = self.reconstruct_ultrametric_from_distribution(dist)
        except ClassViolationError:
            return False
        return same_law(length_service.exact_distribution(rebuilt), dist)

    def ultrametric_diagnostics(self, dist: LengthDistribution) -> UltrametricDiagnostics:
        """
        Radius, branch count and normalized symmetric values read off the top of the law.

        r* is half the largest value of W_2, ell the largest j with
        P{W_2 = 2r*, ..., W_j = j r*} > 0, and for 2 <= j <= ell

            p_j = n(n-1)...(n-j+1) / (j! binom(ell, j)) * P{W_2 = 2r*, ..., W_j = j r*}
        """
        n = dist.n
        if n < 2:
            raise PreconditionError("diagnostics need at least two leaves")
        radius = max(seq[0] for seq in dist.entries) / 2
        run_mass: Dict[int, int] = defaultdict(int)
        for seq, count in dist.entries.items():
            j = 1
            while j < n and seq[j - 1] == (j + 1) * radius:
                j += 1
                run_mass[j] += count
        ell = max(run_mass)
        p_values = {
            j: Fraction(perm(n, j), factorial(j) * comb(ell, j))
            * Fraction(run_mass[j], dist.total)
            for j in range(2, ell + 1)
        }
        return UltrametricDiagnostics(max_radius=radius, ell_count=ell, p_values=p_values)

    # Split-sequence classes

    def _integer_support(self, dist: LengthDistribution, step: str) -> List[Tuple[int, ...]]:
        support = []
        for seq in dist.entries:
            if all(x.denominator == 1 for x in seq):
                support.append(tuple(int(x) for x in seq))
        if not support:
            raise ClassViolationError(step, "the support has no integer sequence")
        return support

    def reconstruct_k_valent(self, dist: LengthDistribution, k: int = 2) -> WeightedTree:
        """
        Parse the minimal down-split sequence in the support of a (k+1)-valent tree.

        Raises:
            ClassViolationError: If the support holds no down-split sequence
        """
        candidates = [
            seq for seq in self._integer_support(dist, "down-split") if split_service.is_down_split(seq, k)
        ]
        if not candidates:
            raise ClassViolationError("down-split", f"no down-split sequence for k={k} in the support")
        best = min(candidates, key=split_service.down_key(k))
        logger.debug(f"minimal down-split sequence {best}")
        return split_service.parse_down_split(best, k).plain()

    def reconstruct_k_ary(self, dist: LengthDistribution, k: int = 2) -> WeightedTree:
        candidates = [
            (0,) + seq
            for seq in self._integer_support(dist, "up-split")
            if split_service.is_up_split((0,) + seq, k)
        ]
        if not candidates:
            raise ClassViolationError("up-split", f"no up-split sequence for k={k} in the support")
        best = min(candidates, key=split_service.up_key(k))
        logger.debug(f"minimal up-split sequence {best}")
        return split_service.parse_up_split(best, k)

    # Hat weights

    def hat_signature(self, tree: WeightedTree) -> LengthSequence:
        """
        Minimal length sequence of the tree rooted at a center and reweighted by descendant counts.

        With two centers the smaller of the two sequences is kept, so equal
        signatures mean isomorphic trees.

        Raises:
            PreconditionError: If the tree is not simple and combinatorial
        """
        if not tree_service.is_combinatorial(tree) or not tree_service.is_simple(tree):
            raise PreconditionError("hat signatures need a simple combinatorial tree")
        if tree.n_leaves < 2:
            raise PreconditionError("hat signatures need at least two leaves")
        if tree.n_leaves == 2:
            return (tree.total_length,)
        plain = tree.plain()
        return min(
            length_service.min_lex_of_tree(tree_service.hat_weights(plain.with_root(c)).plain())
            for c in tree_service.centers(plain)
        )

    def combinatorial_from_hat_signature(self, signature: LengthSequence) -> WeightedTree:
        """The simple combinatorial tree whose hat signature is ``signature``."""
        if len(signature) == 1:
            return single_edge(Fraction(1))
        rebuilt = self.reconstruct_ultrametric(signature)
        return rebuilt.reweighted({(e.u, e.v): Fraction(1) for e in rebuilt.edges})

    def reconstruct_combinatorial_hat(self, dist: LengthDistribution) -> WeightedTree:
        return self.combinatorial_from_hat_signature(length_service.min_lex(dist))


reconstruction_service = ReconstructionService()
