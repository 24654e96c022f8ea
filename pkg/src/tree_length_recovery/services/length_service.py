"""
Random length sequence service.

Computes the exact joint law of (W_2, ..., W_n), the lengths of the subtrees
spanned by the first 2, 3, ..., n leaves of a uniformly random ordering of
the leaves, together with its marked variant, marginals, conditionals and
extremal support points.

The law is computed over chains of leaf subsets rather than permutations.
Chains that reach the same subset with the same length prefix are merged,
since every later increment depends only on the subset. Lengths are scaled
to integers by the common denominator of the edge weights while counting.
"""

from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from itertools import combinations, permutations
from math import factorial, lcm
from typing import Dict, Iterable, List, Optional, Sequence, Tuple
import logging

from ..core.config import settings
from ..core.errors import EmptyEventError, InfeasibleError, PreconditionError
from ..models.schemas import Constraint, LengthDistribution, LengthSequence
from ..models.tree import WeightedTree
from ..utils.rational import common_denominator
from .tree_service import tree_service

logger = logging.getLogger(__name__)

State = Tuple[int, Tuple[int, ...]]
IntMetric = Tuple[Tuple[int, ...], ...]


def _increment(metric: IntMetric, mask: int, y: int) -> int:
    """Distance from leaf y to the subtree spanned by the leaves in ``mask``."""
    members = [i for i in range(len(metric)) if mask >> i & 1]
    a = members[0]
    row_y, row_a = metric[y], metric[a]
    best = row_y[a]
    for b in members[1:]:
        gap = (row_y[a] + row_y[b] - row_a[b]) // 2
        if gap < best:
            best = gap
    return best


def count_chains(metric: IntMetric, starts: Sequence[Tuple[State, int]]) -> Dict[Tuple[int, ...], int]:
    """Grow every start state to the full leaf set, merging equal (subset, prefix) states."""
    n = len(metric)
    full = (1 << n) - 1
    layer: Dict[State, int] = dict(starts)
    while layer and next(iter(layer))[0] != full:
        grown: Dict[State, int] = defaultdict(int)
        for (mask, prefix), count in layer.items():
            last = prefix[-1] if prefix else 0
            for y in range(n):
                if not mask >> y & 1:
                    step = _increment(metric, mask, y)
                    grown[(mask | 1 << y, prefix + (last + step,))] += count
        layer = grown
    return {prefix: count for (_, prefix), count in layer.items()}


class LengthSequenceService:
    """
    Service for exact random length sequence distributions.

    Attributes:
        max_exact_leaves (int): Largest leaf count for factorial enumerations
        jobs (int): Worker processes used by exact_distribution
    """

    def __init__(self, max_exact_leaves: Optional[int] = None, jobs: Optional[int] = None):
        self.max_exact_leaves = (
            max_exact_leaves if max_exact_leaves is not None else settings.max_exact_leaves
        )
        self.jobs = jobs if jobs is not None else settings.jobs

    def _check_size(self, tree: WeightedTree) -> None:
        n = tree.n_leaves
        if n < 2:
            raise PreconditionError(f"length sequences need at least two leaves, got {n}")
        if n > self.max_exact_leaves:
            raise InfeasibleError(
                f"{n} leaves exceed the exact enumeration cap of {self.max_exact_leaves} "
                f"(TREELEN_MAX_EXACT_LEAVES)"
            )

    def integer_metric(self, tree: WeightedTree) -> Tuple[Tuple[str, ...], IntMetric, int]:
        """Leaf labels, leaf distances scaled to integers, and the scale used."""
        labels = tree.leaf_labels
        scale = common_denominator(e.weight for e in tree.edges)
        rows = []
        for x in labels:
            dist = tree_service.vertex_distances(tree, tree.vertex(x))
            rows.append(tuple(int(dist[tree.vertex(y)] * scale) for y in labels))
        return labels, tuple(rows), scale

    def exact_distribution(self, tree: WeightedTree, jobs: Optional[int] = None) -> LengthDistribution:
        """
        Exact joint law of (W_2, ..., W_n) under a uniform leaf ordering.

        Args:
            tree (WeightedTree): Tree with 2 <= n <= max_exact_leaves leaves
            jobs (int): Worker processes; chains are partitioned on the first
                unordered leaf pair (default: the service setting)

        Returns:
            LengthDistribution: Ordering counts summing to n!

        Raises:
            PreconditionError: If the tree has fewer than 2 leaves
            InfeasibleError: If the tree exceeds the leaf cap
        """
        self._check_size(tree)
        _, metric, scale = self.integer_metric(tree)
        n = len(metric)
        starts: Dict[State, int] = defaultdict(int)
        for i, j in combinations(range(n), 2):
            starts[(1 << i | 1 << j, (metric[i][j],))] += 2
        counts = self._run(metric, list(starts.items()), jobs or self.jobs)
        logger.debug(f"exact distribution: n={n}, support={len(counts)}")
        return self._to_distribution(n, factorial(n), counts, scale)

    def marked_distribution(self, tree: WeightedTree, label: str) -> LengthDistribution:
        """Joint law of (W_2, ..., W_n) given that the first sampled leaf is ``label``."""
        self._check_size(tree)
        labels, metric, scale = self.integer_metric(tree)
        tree.vertex(label)
        v = labels.index(label)
        counts = count_chains(metric, [((1 << v, ()), 1)])
        n = len(metric)
        return self._to_distribution(n, factorial(n - 1), counts, scale)

    def _run(
        self, metric: IntMetric, starts: List[Tuple[State, int]], jobs: int
    ) -> Dict[Tuple[int, ...], int]:
        if jobs <= 1 or len(starts) < 2:
            return count_chains(metric, starts)
        chunks = [starts[i::jobs] for i in range(jobs) if starts[i::jobs]]
        merged: Counter = Counter()
        with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
            for part in pool.map(count_chains, [metric] * len(chunks), chunks):
                merged.update(part)
        return dict(merged)

    def _to_distribution(
        self, n: int, total: int, counts: Dict[Tuple[int, ...], int], scale: int
    ) -> LengthDistribution:
        entries = {
            tuple(Fraction(x, scale) for x in prefix): count for prefix, count in counts.items()
        }
        return LengthDistribution.model_construct(n=n, total=total, entries=entries)

    def permutation_distribution(self, tree: WeightedTree) -> LengthDistribution:
        """Brute-force law over all n! leaf orderings, measuring each prefix directly."""
        self._check_size(tree)
        counts: Counter = Counter()
        for order in permutations(tree.leaf_labels):
            counts[
                tuple(tree_service.steiner_length(tree, order[:k]) for k in range(2, len(order) + 1))
            ] += 1
        n = tree.n_leaves
        return LengthDistribution(n=n, total=factorial(n), entries=dict(counts))

    # Laws derived from a distribution

    def coordinate(self, seq: LengthSequence, k: int) -> Fraction:
        """W_k of a support sequence, with W_1 = 0."""
        return Fraction(0) if k == 1 else seq[k - 2]

    def marginal(self, dist: LengthDistribution, k: int) -> Dict[Fraction, Fraction]:
        if not 1 <= k <= dist.n:
            raise PreconditionError(f"coordinate {k} outside 1..{dist.n}")
        law: Dict[Fraction, int] = defaultdict(int)
        for seq, count in dist.entries.items():
            law[self.coordinate(seq, k)] += count
        return {value: Fraction(c, dist.total) for value, c in sorted(law.items())}

    def increment_law(self, dist: LengthDistribution, k: int) -> Dict[Fraction, Fraction]:
        """Law of W_k - W_{k-1}."""
        if not 2 <= k <= dist.n:
            raise PreconditionError(f"increment {k} outside 2..{dist.n}")
        law: Dict[Fraction, int] = defaultdict(int)
        for seq, count in dist.entries.items():
            law[self.coordinate(seq, k) - self.coordinate(seq, k - 1)] += count
        return {value: Fraction(c, dist.total) for value, c in sorted(law.items())}

    def pendant_increment_law(self, dist: LengthDistribution) -> Dict[Fraction, Fraction]:
        """Law of W_n - W_{n-1}: a uniform pick among the n pendant edge lengths."""
        return self.increment_law(dist, dist.n)

    def conditional(
        self, dist: LengthDistribution, constraints: Iterable[Constraint]
    ) -> LengthDistribution:
        """
        Restrict a distribution to an equality event.

        Raises:
            EmptyEventError: If the event has probability zero
        """
        constraints = list(constraints)
        for c in constraints:
            if c.index > dist.n:
                raise PreconditionError(f"constraint on W_{c.index} but n = {dist.n}")
        kept = {
            seq: count
            for seq, count in dist.entries.items()
            if all(self._satisfies(seq, c) for c in constraints)
        }
        if not kept:
            described = ", ".join(self._describe(c) for c in constraints)
            raise EmptyEventError(f"conditioning event has probability zero: {described}")
        return LengthDistribution.model_construct(
            n=dist.n, total=sum(kept.values()), entries=kept
        )

    def _satisfies(self, seq: LengthSequence, c: Constraint) -> bool:
        value = self.coordinate(seq, c.index)
        if c.minus is not None:
            value -= self.coordinate(seq, c.minus)
        return value == c.value

    def _describe(self, c: Constraint) -> str:
        if c.minus is None:
            return f"W_{c.index} = {c.value}"
        return f"W_{c.index} - W_{c.minus} = {c.value}"

    def min_lex(self, dist: LengthDistribution) -> LengthSequence:
        return min(dist.entries)

    def min_lex_of_tree(self, tree: WeightedTree) -> LengthSequence:
        """Lexicographic minimum of the support, found by a frontier search over leaf subsets."""
        if tree.n_leaves < 2:
            raise PreconditionError("length sequences need at least two leaves")
        _, metric, scale = self.integer_metric(tree)
        n = len(metric)
        first = min(metric[i][j] for i, j in combinations(range(n), 2))
        frontier = {
            1 << i | 1 << j for i, j in combinations(range(n), 2) if metric[i][j] == first
        }
        prefix = [first]
        for _ in range(n - 2):
            options = [
                (_increment(metric, mask, y), mask | 1 << y)
                for mask in frontier
                for y in range(n)
                if not mask >> y & 1
            ]
            step = min(s for s, _ in options)
            frontier = {mask for s, mask in options if s == step}
            prefix.append(prefix[-1] + step)
        return tuple(Fraction(x, scale) for x in prefix)

    def mix_distributions(
        self, components: Sequence[Tuple[Fraction, LengthDistribution]]
    ) -> LengthDistribution:
        """Distribution of the mixture sum_i mu_i dist_i, with integer counts on a common total."""
        components = [(Fraction(mu), d) for mu, d in components if mu != 0]
        if not components:
            raise PreconditionError("a mixture needs at least one component with positive weight")
        n = components[0][1].n
        if any(d.n != n for _, d in components):
            raise PreconditionError("mixed distributions must share the leaf count")
        if any(mu < 0 for mu, _ in components) or sum(mu for mu, _ in components) != 1:
            raise PreconditionError("mixture weights must be nonnegative and sum to 1")
        total = lcm(*((mu / d.total).denominator for mu, d in components))
        entries: Dict[LengthSequence, int] = defaultdict(int)
        for mu, d in components:
            factor = mu / d.total * total
            for seq, count in d.entries.items():
                entries[seq] += int(factor * count)
        return LengthDistribution.model_construct(n=n, total=total, entries=dict(entries))

    # Multiset statistics

    def pairwise_distance_multiset(self, tree: WeightedTree) -> Counter:
        dm = tree_service.distance_matrix(tree)
        size = len(dm.labels)
        return Counter(dm.d[i][j] for i, j in combinations(range(size), 2))

    def triple_length_multiset(self, tree: WeightedTree) -> Counter:
        dm = tree_service.distance_matrix(tree)
        d = dm.d
        return Counter(
            (d[i][j] + d[j][k] + d[i][k]) / 2
            for i, j, k in combinations(range(len(dm.labels)), 3)
        )


length_service = LengthSequenceService()
