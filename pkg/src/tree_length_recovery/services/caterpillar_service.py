"""
Caterpillar service.

A caterpillar with composition (n_0, ..., n_l) has an internal path
p_0 - ... - p_l with n_r leaves hanging off p_r, all edges of length 1.
Sampling leaves in random order and writing K_r for the spread (max minus
min) of the path positions seen among the first r leaves gives
W_r = r + K_r, so the law of the length sequence is the law of the spread
walk. Its first steps determine the composition up to reversal:

- P{K_2 = l} = 2 n_0 n_l / (n(n-1)) and the longest run of zeros before
  K jumps to l give the end counts {n_0, n_l};
- P{K_2 = r, K_3 = l} = 2 n_0 n_l (n_r + n_{l-r}) / (n(n-1)(n-2)) gives the
  pair sums n_r + n_{l-r};
- P{K_2 = k} gives the autocorrelations sum_r n_r n_{r+k}, which pick the
  orientation of every pair.
"""

from fractions import Fraction
from itertools import product
from math import perm
from typing import Dict, Iterator, List, Optional, Tuple
import logging

from ..core.errors import ClassViolationError, InternalConsistencyError, PreconditionError
from ..models.schemas import CaterpillarComposition, CaterpillarStatistics, LengthDistribution
from ..models.tree import TreeBuilder, WeightedTree

logger = logging.getLogger(__name__)


class CaterpillarService:
    def caterpillar_tree(self, composition: CaterpillarComposition) -> WeightedTree:
        """Combinatorial caterpillar; leaves x1, x2, ... are numbered along the path."""
        builder = TreeBuilder()
        spine = [builder.add_vertex() for _ in composition.counts]
        for a, b in zip(spine, spine[1:]):
            builder.add_edge(a, b)
        leaf = 1
        for vertex, count in zip(spine, composition.counts):
            for _ in range(count):
                builder.add_edge(vertex, builder.add_vertex(f"x{leaf}"))
                leaf += 1
        return builder.build()

    def detect_caterpillar(self, dist: LengthDistribution) -> Optional[int]:
        """
        The path length l if the law looks like a caterpillar's, else None.

        Requires integer lengths, l = max W_2 - 2 >= 0 and W_n = l + n almost surely.
        """
        if dist.n < 2:
            return None
        if any(x.denominator != 1 for seq in dist.entries for x in seq):
            return None
        ell = int(max(seq[0] for seq in dist.entries)) - 2
        if ell < 0:
            return None
        if any(seq[-1] != ell + dist.n for seq in dist.entries):
            return None
        return ell

    # Closed forms

    def caterpillar_statistics(self, composition: CaterpillarComposition) -> CaterpillarStatistics:
        counts = composition.counts
        n, ell = composition.n, composition.path_length
        autocorrelation = {
            k: sum(counts[r] * counts[r + k] for r in range(ell - k + 1)) for k in range(ell + 1)
        }
        pairs = n * (n - 1)
        pair_probs = {0: Fraction(autocorrelation[0] - n, pairs)}
        for k in range(1, ell + 1):
            pair_probs[k] = Fraction(2 * autocorrelation[k], pairs)

        triple_probs: Dict[int, Fraction] = {}
        if n >= 3:
            triples = n * (n - 1) * (n - 2)
            ends = counts[0] * counts[-1]
            for r in range(1, ell // 2 + 1):
                triple_probs[r] = Fraction(2 * ends * (counts[r] + counts[ell - r]), triples)

        endpoint_run_probs: Dict[int, Fraction] = {}
        if ell >= 1:
            first, last = counts[0], counts[-1]
            for k in range(1, n):
                endpoint_run_probs[k] = Fraction(
                    perm(first, k) * last + perm(last, k) * first,
                    perm(n, k + 1),
                )
        return CaterpillarStatistics(
            n=n,
            path_length=ell,
            pair_probs=pair_probs,
            triple_probs=triple_probs,
            autocorrelation=autocorrelation,
            endpoint_run_probs=endpoint_run_probs,
        )

    # Empirical side

    def statistics_from_distribution(self, dist: LengthDistribution, ell: int) -> CaterpillarStatistics:
        """The same statistics read off a distribution through K_r = W_r - r."""
        n = dist.n
        spreads = {
            seq: tuple(int(w) - r for r, w in enumerate(seq, start=2)) for seq in dist.entries
        }

        def mass(predicate) -> Fraction:
            return Fraction(
                sum(count for seq, count in dist.entries.items() if predicate(spreads[seq])),
                dist.total,
            )

        pair_probs = {k: mass(lambda s, k=k: s[0] == k) for k in range(ell + 1)}
        triple_probs = {}
        if n >= 3:
            for r in range(1, ell // 2 + 1):
                triple_probs[r] = mass(lambda s, r=r: s[0] == r and s[1] == ell)
        endpoint_run_probs = {}
        if ell >= 1:
            for k in range(1, n):
                endpoint_run_probs[k] = mass(
                    lambda s, k=k: all(x == 0 for x in s[: k - 1]) and s[k - 1] == ell
                )

        pairs = n * (n - 1)
        autocorrelation = {}
        for k, p in pair_probs.items():
            value = p * pairs + n if k == 0 else p * pairs / 2
            if value.denominator != 1:
                raise InternalConsistencyError(
                    f"P{{K_2 = {k}}} = {p} is not a caterpillar pair frequency"
                )
            autocorrelation[k] = int(value)
        return CaterpillarStatistics(
            n=n,
            path_length=ell,
            pair_probs=pair_probs,
            triple_probs=triple_probs,
            autocorrelation=autocorrelation,
            endpoint_run_probs=endpoint_run_probs,
        )

    # Inversion

    def solve_composition(self, stats: CaterpillarStatistics) -> CaterpillarComposition:
        """
        The unique composition class (up to reversal) with the given statistics.

        Raises:
            InternalConsistencyError: If no class or several classes fit
        """
        n, ell = stats.n, stats.path_length
        if ell == 0:
            return CaterpillarComposition(counts=(n,))
        if n == 2:
            return CaterpillarComposition(counts=(1,) + (0,) * (ell - 1) + (1,))

        ends_product = stats.pair_probs[ell] * n * (n - 1) / 2
        longest = max((k for k, p in stats.endpoint_run_probs.items() if p > 0), default=0)
        if ends_product.denominator != 1 or longest == 0 or int(ends_product) % longest:
            raise InternalConsistencyError("end counts are not consistent with a caterpillar")
        big, small = longest, int(ends_product) // longest

        triples = n * (n - 1) * (n - 2)
        pair_sums: Dict[int, int] = {}
        for r, p in stats.triple_probs.items():
            value = p * triples / (2 * big * small)
            if value.denominator != 1:
                raise InternalConsistencyError(f"pair sum n_{r} + n_{ell - r} is not an integer")
            pair_sums[r] = int(value)

        solutions = set()
        for middle in self._orientations(ell, pair_sums):
            for first, last in {(big, small), (small, big)}:
                counts = (first,) + middle + (last,)
                if sum(counts) != n:
                    continue
                candidate = CaterpillarComposition(counts=counts)
                if self.caterpillar_statistics(candidate) == stats:
                    solutions.add(candidate.canonical().counts)
        if len(solutions) != 1:
            raise InternalConsistencyError(
                f"{len(solutions)} composition classes fit the caterpillar statistics"
            )
        (counts,) = solutions
        logger.debug(f"caterpillar composition {counts}")
        return CaterpillarComposition(counts=counts)

    def _orientations(self, ell: int, pair_sums: Dict[int, int]) -> List[Tuple[int, ...]]:
        """Every interior (n_1, ..., n_{l-1}) whose mirrored pairs add up to ``pair_sums``."""
        if ell == 1:
            return [()]
        free = list(range(1, (ell + 1) // 2))
        middle = ell // 2 if ell % 2 == 0 else None
        options = [range(pair_sums[r] + 1) for r in free]
        interiors = []
        for chosen in product(*options):
            counts = [0] * (ell + 1)
            for r, value in zip(free, chosen):
                counts[r] = value
                counts[ell - r] = pair_sums[r] - value
            if middle is not None:
                total = pair_sums[middle]
                if total % 2:
                    continue
                counts[middle] = total // 2
            interiors.append(tuple(counts[1:ell]))
        return interiors

    def reconstruct_caterpillar(self, dist: LengthDistribution) -> CaterpillarComposition:
        """
        Composition (up to reversal) of the caterpillar with distribution ``dist``.

        Raises:
            ClassViolationError: If the distribution does not pass detection
            InternalConsistencyError: If the statistics fit no class or several
        """
        ell = self.detect_caterpillar(dist)
        if ell is None:
            raise ClassViolationError("detect", "the distribution is not a caterpillar's")
        logger.debug(f"caterpillar detected with path length {ell}")
        return self.solve_composition(self.statistics_from_distribution(dist, ell))

    def compositions(self, n: int, budget: int) -> List[CaterpillarComposition]:
        """All compositions of n leaves with n + l <= budget, one per reversal class."""
        if n < 2:
            raise PreconditionError("caterpillars need at least two leaves")
        found = set()
        for ell in range(0, budget - n + 1):
            for counts in self._spread(n, ell + 1):
                if counts[0] >= 1 and counts[-1] >= 1:
                    found.add(CaterpillarComposition(counts=counts).canonical().counts)
        return [CaterpillarComposition(counts=c) for c in sorted(found, key=lambda c: (len(c), c))]

    def _spread(self, total: int, parts: int) -> Iterator[Tuple[int, ...]]:
        if parts == 1:
            yield (total,)
            return
        for head in range(total + 1):
            for tail in self._spread(total - head, parts - 1):
                yield (head,) + tail


caterpillar_service = CaterpillarService()
