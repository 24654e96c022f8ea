"""
Class generation service.

Enumerates every isomorphism type of a tree class with a given leaf count,
draws seeded random members of a class, and runs the injectivity oracle
that compares the length-sequence laws of all types of a class.

Enumerations grow trees one step at a time (a leaf expanded into k leaves,
a leaf attached to an internal vertex, or an edge subdivided to carry a new
leaf) and keep one representative per canonical code. Leaves of generated
trees are labeled x1, x2, ... in vertex order.
"""

from collections import defaultdict
from fractions import Fraction
from typing import IO, Dict, Iterable, List, Optional, Sequence, Tuple
import logging

from ..core.config import settings
from ..core.errors import InfeasibleError, InternalConsistencyError, PreconditionError
from ..models.schemas import (
    CaterpillarComposition,
    ClassEnumeration,
    InjectivityReport,
    TreeClass,
    TreeClassTag,
    WeightScheme,
    WitnessReport,
)
from ..models.tree import TreeBuilder, WeightedTree
from ..utils.newick import format_tree
from ..utils.splitmix import SplitMix64
from .caterpillar_service import caterpillar_service
from .isomorphism_service import isomorphism_service
from .length_service import length_service
from .reconstruction_service import reconstruction_service, same_law, single_edge, star_tree
from .tree_service import tree_service

logger = logging.getLogger(__name__)

Shape = Tuple[int, List[Tuple[int, int]]]

_WEIGHTED = {WeightScheme.UNIT, WeightScheme.GENERAL_POSITION, WeightScheme.RANDOM_RATIONAL}

SCHEMES_BY_CLASS = {
    TreeClassTag.STAR: _WEIGHTED,
    TreeClassTag.SMALL_N: _WEIGHTED,
    TreeClassTag.GENERAL_POSITION: {WeightScheme.GENERAL_POSITION},
    TreeClassTag.ULTRAMETRIC: {WeightScheme.ULTRAMETRIC},
    TreeClassTag.CATERPILLAR: {WeightScheme.UNIT},
    TreeClassTag.K_VALENT: {WeightScheme.UNIT},
    TreeClassTag.K_ARY: {WeightScheme.UNIT},
    TreeClassTag.COMBINATORIAL_HAT: {WeightScheme.UNIT},
    TreeClassTag.SIMPLE_COMBINATORIAL: {WeightScheme.UNIT},
}

ENUMERABLE = {
    TreeClassTag.K_VALENT,
    TreeClassTag.K_ARY,
    TreeClassTag.CATERPILLAR,
    TreeClassTag.SIMPLE_COMBINATORIAL,
    TreeClassTag.COMBINATORIAL_HAT,
}


def assemble(
    vertex_count: int,
    edges: Sequence[Tuple[int, int]],
    root: Optional[int] = None,
    weights: Optional[Sequence[Fraction]] = None,
) -> WeightedTree:
    """Build a tree on vertices 0..vertex_count-1, labeling the leaves x1, x2, ... in id order."""
    degree = [0] * vertex_count
    for u, v in edges:
        degree[u] += 1
        degree[v] += 1
    builder = TreeBuilder()
    leaf = 0
    for v in range(vertex_count):
        if degree[v] <= 1:
            leaf += 1
            builder.add_vertex(f"x{leaf}")
        else:
            builder.add_vertex()
    for i, (u, v) in enumerate(edges):
        builder.add_edge(u, v, weights[i] if weights is not None else 1)
    return builder.build(root=root)


def shape_of(tree: WeightedTree) -> Shape:
    return len(tree.vertices), [(e.u, e.v) for e in tree.edges]


def expand_leaf(shape: Shape, leaf: int, k: int) -> Shape:
    count, edges = shape
    return count + k, edges + [(leaf, count + i) for i in range(k)]


def attach_leaf(shape: Shape, v: int) -> Shape:
    count, edges = shape
    return count + 1, edges + [(v, count)]


def subdivide_and_attach(shape: Shape, index: int) -> Shape:
    count, edges = shape
    u, v = edges[index]
    middle, leaf = count, count + 1
    rest = edges[:index] + edges[index + 1:]
    return count + 2, rest + [(u, middle), (middle, v), (middle, leaf)]


class ClassGenerationService:
    """
    Service for enumerating and sampling tree classes.

    Attributes:
        max_enumeration_leaves (int): Largest leaf count enumerate_class accepts
        caterpillar_budget (int): Bound on n + l for caterpillar enumeration
    """

    def __init__(
        self, max_enumeration_leaves: Optional[int] = None, caterpillar_budget: Optional[int] = None
    ):
        self.max_enumeration_leaves = (
            max_enumeration_leaves
            if max_enumeration_leaves is not None
            else settings.max_enumeration_leaves
        )
        self.caterpillar_budget = (
            caterpillar_budget if caterpillar_budget is not None else settings.caterpillar_budget
        )

    # Membership

    def belongs_to(self, tree: WeightedTree, tree_class: TreeClass) -> bool:
        tag = tree_class.tag
        if tag == TreeClassTag.STAR:
            return sum(1 for v in tree.vertices if not tree.is_leaf(v)) <= 1
        if tag == TreeClassTag.SMALL_N:
            return tree_service.is_simple(tree) and tree.n_leaves <= 4
        if tag == TreeClassTag.GENERAL_POSITION:
            return tree_service.is_simple(tree) and tree_service.is_general_position(tree)
        if tag == TreeClassTag.ULTRAMETRIC:
            return tree_service.is_simple(tree) and tree_service.is_ultrametric(tree)
        if not tree_service.is_combinatorial(tree):
            return False
        if tag == TreeClassTag.CATERPILLAR:
            return tree_service.is_caterpillar_structural(tree) is not None
        if tag == TreeClassTag.K_VALENT:
            return tree_service.is_k_valent(tree, tree_class.k)
        if tag == TreeClassTag.K_ARY:
            return tree_service.is_k_ary(tree, tree_class.k)
        return tree_service.is_simple(tree)

    # Enumeration

    def enumerate_class(self, tree_class: TreeClass, n: int) -> ClassEnumeration:
        """
        Every isomorphism type of the class with n leaves, sorted by canonical code.

        Caterpillars are listed for all path lengths l with n + l within the
        caterpillar budget.

        Raises:
            PreconditionError: If the class is not enumerable or n < 1
            InfeasibleError: If n exceeds the enumeration cap
        """
        if tree_class.tag not in ENUMERABLE:
            raise PreconditionError(f"class {tree_class} cannot be enumerated")
        if n < 1:
            raise PreconditionError("enumeration needs at least one leaf")
        if n > self.max_enumeration_leaves:
            raise InfeasibleError(
                f"{n} leaves exceed the enumeration cap of {self.max_enumeration_leaves} "
                f"(TREELEN_MAX_ENUMERATION_LEAVES)"
            )
        tag = tree_class.tag
        if tag == TreeClassTag.K_VALENT:
            trees = self._k_valent(tree_class.k, n)
        elif tag == TreeClassTag.K_ARY:
            trees = self._k_ary(tree_class.k, n)
        elif tag == TreeClassTag.CATERPILLAR and n >= 2:
            trees = [
                caterpillar_service.caterpillar_tree(c)
                for c in caterpillar_service.compositions(n, self.caterpillar_budget)
            ]
        elif tag == TreeClassTag.CATERPILLAR:
            trees = []
        else:
            trees = self._simple(n)

        unique = self._dedup(trees)
        codes = tuple(sorted(unique))
        logger.info(f"enumerated {len(codes)} types of class {tree_class} with {n} leaves")
        return ClassEnumeration(
            tree_class=tree_class, n=n, items=tuple(unique[c] for c in codes), codes=codes
        )

    def _dedup(self, trees: Iterable[WeightedTree]) -> Dict[str, WeightedTree]:
        unique: Dict[str, WeightedTree] = {}
        for tree in trees:
            unique.setdefault(isomorphism_service.canonical_code(tree).code, tree)
        return unique

    def _grow(
        self, seeds: List[WeightedTree], steps: int, moves, root: Optional[int] = None
    ) -> List[WeightedTree]:
        level = self._dedup(seeds)
        for _ in range(steps):
            grown = (
                assemble(*shape, root=root)
                for tree in level.values()
                for shape in moves(tree)
            )
            level = self._dedup(grown)
        return list(level.values())

    def _k_valent(self, k: int, n: int) -> List[WeightedTree]:
        if n == 2:
            return [single_edge(Fraction(1))]
        if n < k + 1 or (n - 2) % (k - 1):
            return []
        base = assemble(k + 2, [(0, i) for i in range(1, k + 2)])
        return self._grow([base], (n - k - 1) // (k - 1), lambda t: self._leaf_expansions(t, k))

    def _k_ary(self, k: int, n: int) -> List[WeightedTree]:
        if n == 1:
            return [assemble(1, [], root=0)]
        if n < k or (n - 1) % (k - 1):
            return []
        base = assemble(k + 1, [(0, i) for i in range(1, k + 1)], root=0)
        return self._grow([base], (n - k) // (k - 1), lambda t: self._leaf_expansions(t, k), root=0)

    def _leaf_expansions(self, tree: WeightedTree, k: int) -> List[Shape]:
        shape = shape_of(tree)
        return [expand_leaf(shape, leaf, k) for leaf in sorted(tree.labels)]

    def _simple(self, n: int) -> List[WeightedTree]:
        if n == 1:
            return [assemble(1, [])]
        return self._grow([single_edge(Fraction(1))], n - 2, self._simple_moves)

    def _simple_moves(self, tree: WeightedTree) -> List[Shape]:
        shape = shape_of(tree)
        moves = [attach_leaf(shape, v) for v in tree.vertices if not tree.is_leaf(v)]
        moves.extend(subdivide_and_attach(shape, i) for i in range(len(tree.edges)))
        return moves

    def dump_corpus(self, enumeration: ClassEnumeration, stream: IO[str]) -> None:
        for tree in enumeration.items:
            stream.write(format_tree(tree) + "\n")

    # Random generation

    def random_tree(
        self,
        tree_class: TreeClass,
        n: int,
        seed: int,
        scheme: WeightScheme = WeightScheme.UNIT,
    ) -> WeightedTree:
        """
        Seeded random member of a class.

        The same (class, n, seed, scheme) always yields the same tree.

        Raises:
            PreconditionError: If the scheme does not fit the class or n is
                impossible for the class
        """
        tag = tree_class.tag
        if scheme not in SCHEMES_BY_CLASS[tag]:
            raise PreconditionError(f"weight scheme {scheme.value} does not fit class {tree_class}")
        if n < 2:
            raise PreconditionError("random trees need at least two leaves")
        if tag == TreeClassTag.SMALL_N and n > 4:
            raise PreconditionError("the small_n class has at most four leaves")
        rng = SplitMix64(seed)

        if scheme == WeightScheme.ULTRAMETRIC:
            tree = self._coalescent(n, rng)
        else:
            vertex_count, edges, root = self._random_shape(tree_class, n, rng)
            weights = self._weights(len(edges), scheme, rng)
            tree = assemble(vertex_count, edges, root=root, weights=weights)
        if not self.belongs_to(tree, tree_class):
            raise InternalConsistencyError(f"generated tree is not in class {tree_class}")
        return tree

    def _random_shape(
        self, tree_class: TreeClass, n: int, rng: SplitMix64
    ) -> Tuple[int, List[Tuple[int, int]], Optional[int]]:
        tag, k = tree_class.tag, tree_class.k
        if tag == TreeClassTag.STAR:
            count, edges = shape_of(star_tree([Fraction(1)] * n) if n > 2 else single_edge(Fraction(1)))
            return count, edges, None
        if tag == TreeClassTag.K_VALENT and n == 2:
            count, edges = shape_of(single_edge(Fraction(1)))
            return count, edges, None
        if tag == TreeClassTag.CATERPILLAR:
            return (*shape_of(caterpillar_service.caterpillar_tree(self._random_composition(n, rng))), None)
        if tag in (TreeClassTag.K_VALENT, TreeClassTag.K_ARY):
            rooted = tag == TreeClassTag.K_ARY
            first = k if rooted else k + 1
            if n < first or (n - first) % (k - 1):
                raise PreconditionError(f"no tree of class {tree_class} has {n} leaves")
            shape: Shape = (first + 1, [(0, i) for i in range(1, first + 1)])
            leaves = list(range(1, first + 1))
            for _ in range((n - first) // (k - 1)):
                leaf = leaves.pop(rng.below(len(leaves)))
                shape = expand_leaf(shape, leaf, k)
                leaves.extend(range(shape[0] - k, shape[0]))
            return shape[0], shape[1], 0 if rooted else None

        shape = (2, [(0, 1)])
        internal: List[int] = []
        for _ in range(n - 2):
            count, edges = shape
            pick = rng.below(len(internal) + len(edges))
            if pick < len(internal):
                shape = attach_leaf(shape, internal[pick])
            else:
                shape = subdivide_and_attach(shape, pick - len(internal))
                internal.append(count)
        return shape[0], shape[1], None

    def _random_composition(self, n: int, rng: SplitMix64) -> CaterpillarComposition:
        ell = rng.below(n)
        if ell == 0:
            return CaterpillarComposition(counts=(n,))
        counts = [0] * (ell + 1)
        counts[0] = counts[-1] = 1
        for _ in range(n - 2):
            counts[rng.below(ell + 1)] += 1
        return CaterpillarComposition(counts=tuple(counts))

    def _weights(self, m: int, scheme: WeightScheme, rng: SplitMix64) -> List[Fraction]:
        if scheme == WeightScheme.UNIT:
            return [Fraction(1)] * m
        if scheme == WeightScheme.GENERAL_POSITION:
            scale = rng.rational()
            return [scale * 2 ** e for e in rng.shuffled(range(m))]
        return [rng.rational() for _ in range(m)]

    def _coalescent(self, n: int, rng: SplitMix64) -> WeightedTree:
        """
        Random ultrametric tree by merging clusters at increasing rational heights.

        A merge occasionally adds one more cluster to the most recent merge
        node instead, producing vertices of higher degree.
        """
        height: Dict[int, Fraction] = {v: Fraction(0) for v in range(n)}
        clusters = list(range(n))
        edges: List[Tuple[int, int]] = []
        weights: List[Fraction] = []
        count = n
        latest: Optional[int] = None
        while len(clusters) > 1:
            if latest is not None and rng.below(4) == 0:
                others = [c for c in clusters if c != latest]
                child = others[rng.below(len(others))]
                clusters.remove(child)
                edges.append((latest, child))
                weights.append(height[latest] - height[child])
                continue
            first = clusters.pop(rng.below(len(clusters)))
            second = clusters.pop(rng.below(len(clusters)))
            node = count
            count += 1
            height[node] = max(height.values()) + rng.rational()
            for child in (first, second):
                edges.append((node, child))
                weights.append(height[node] - height[child])
            clusters.append(node)
            latest = node
        return tree_service.suppress_degree_two(assemble(count, edges, weights=weights))

    # Oracles

    def subdivision_witness(self) -> Tuple[WeightedTree, WeightedTree]:
        """Two non-isomorphic trees with one distribution: a star and a copy with an edge subdivided."""
        star = star_tree([Fraction(1), Fraction(1), Fraction(2)])
        center = next(v for v in star.vertices if not star.is_leaf(v))
        far = star.vertex("x3")
        return star, tree_service.subdivide_edge(star, center, far, Fraction(1))

    def known_witnesses(self) -> List[WitnessReport]:
        first, second = self.subdivision_witness()
        reports = [
            WitnessReport(
                name="subdivision",
                statistic="length_distribution",
                first=format_tree(first),
                second=format_tree(second),
                isomorphic=isomorphism_service.is_isomorphic(first, second),
                statistic_collides=same_law(
                    length_service.exact_distribution(first),
                    length_service.exact_distribution(second),
                ),
            )
        ]
        left = CaterpillarComposition(counts=(2, 11, 12))
        right = CaterpillarComposition(counts=(3, 14, 8))
        left_tree = caterpillar_service.caterpillar_tree(left)
        right_tree = caterpillar_service.caterpillar_tree(right)
        isomorphic = isomorphism_service.is_isomorphic(left_tree, right_tree)
        for statistic in ("pairwise_distance_multiset", "triple_length_multiset"):
            measure = getattr(length_service, statistic)
            reports.append(
                WitnessReport(
                    name="caterpillar_pair",
                    statistic=statistic,
                    first=str(left),
                    second=str(right),
                    isomorphic=isomorphic,
                    statistic_collides=measure(left_tree) == measure(right_tree),
                )
            )
        return reports

    def injectivity_oracle(
        self, tree_class: TreeClass, n: int, jobs: Optional[int] = None
    ) -> InjectivityReport:
        """
        Compare the length-sequence laws of all types of a class.

        For the combinatorial_hat class the compared statistic is the hat
        signature instead of the full law.
        """
        enumeration = self.enumerate_class(tree_class, n)
        groups: Dict[tuple, List[str]] = defaultdict(list)
        for code, tree in zip(enumeration.codes, enumeration.items):
            if tree_class.tag == TreeClassTag.COMBINATORIAL_HAT:
                key: tuple = reconstruction_service.hat_signature(tree)
            else:
                key = tuple(length_service.exact_distribution(tree, jobs=jobs).sorted_items())
            groups[key].append(code)
        collisions = [
            (codes[i], codes[j])
            for codes in groups.values()
            for i in range(len(codes))
            for j in range(i + 1, len(codes))
        ]
        if collisions:
            logger.warning(f"{len(collisions)} colliding pairs in class {tree_class} with {n} leaves")
        return InjectivityReport(
            tree_class=tree_class,
            n=n,
            type_count=len(enumeration.codes),
            injective=not collisions,
            collisions=collisions,
            witnesses=self.known_witnesses(),
        )


classgen_service = ClassGenerationService()
