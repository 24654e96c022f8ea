"""
Tree service.

Exact measurements and structural predicates on edge-weighted trees:

- Steiner subtree lengths W_T(K) and leaf-to-leaf distances
- The pair formula recovering total length from weighted distances
- Subtree restriction with suppression of degree-2 vertices
- Structural predicates (simple, combinatorial, k-valent, k-ary, caterpillar,
  ultrametric, general position)
- The Farris transform and the descendant-count ("hat") weights

All arithmetic is carried out with ``fractions.Fraction``.
"""

from collections import deque
from fractions import Fraction
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Set, Tuple
import logging

from ..core.config import settings
from ..core.errors import InfeasibleError, PreconditionError
from ..models.schemas import CaterpillarComposition
from ..models.tree import DistanceMatrix, Edge, TreeBuilder, WeightedTree
from ..utils.rational import common_denominator

logger = logging.getLogger(__name__)


def rooted_order(
    adjacency: Dict[int, Dict[int, Fraction]], root: int
) -> Tuple[List[int], Dict[int, Optional[int]]]:
    """Preorder of the tree hung from ``root`` together with parent pointers."""
    parent: Dict[int, Optional[int]] = {root: None}
    order = [root]
    stack = [root]
    while stack:
        x = stack.pop()
        for y in adjacency[x]:
            if y not in parent:
                parent[y] = x
                order.append(y)
                stack.append(y)
    return order, parent


class TreeService:
    """
    Service for exact measurements on WeightedTree values.

    Every method is a pure function of its arguments; trees are immutable
    and may be shared freely between worker processes.

    Attributes:
        max_general_position_edges (int): Largest edge count for which the
            2^|E| subset-sum test is attempted
    """

    def __init__(self, max_general_position_edges: Optional[int] = None):
        self.max_general_position_edges = (
            max_general_position_edges
            if max_general_position_edges is not None
            else settings.max_general_position_edges
        )

    # Lengths and distances

    def steiner_length(self, tree: WeightedTree, labels: Iterable[str]) -> Fraction:
        """
        Total edge weight of the smallest subtree containing the given leaves.

        Args:
            tree (WeightedTree): Tree to measure
            labels (Iterable[str]): Nonempty set of leaf labels K

        Returns:
            Fraction: W_T(K); zero for a single leaf

        Raises:
            UnknownLabelError: If a label is not a leaf of the tree
            PreconditionError: If K is empty

        Example:
            >>> tree_service.steiner_length(quartet, ["a", "b"])
            Fraction(2, 1)
        """
        targets = {tree.vertex(label) for label in labels}
        if not targets:
            raise PreconditionError("steiner_length needs at least one leaf")
        if len(targets) == 1:
            return Fraction(0)
        edges = self._steiner_edges(tree, targets)
        return sum((w for _, _, w in edges), Fraction(0))

    def _steiner_edges(
        self, tree: WeightedTree, targets: Set[int]
    ) -> List[Tuple[int, int, Fraction]]:
        anchor = next(iter(targets))
        order, parent = rooted_order(tree.adjacency, anchor)
        below = {v: (1 if v in targets else 0) for v in order}
        edges = []
        for v in reversed(order):
            p = parent[v]
            if p is None:
                continue
            below[p] += below[v]
            if below[v] > 0:
                edges.append((p, v, tree.weight(p, v)))
        return edges

    def vertex_distances(self, tree: WeightedTree, source: int) -> Dict[int, Fraction]:
        dist = {source: Fraction(0)}
        queue = deque([source])
        while queue:
            x = queue.popleft()
            for y, w in tree.adjacency[x].items():
                if y not in dist:
                    dist[y] = dist[x] + w
                    queue.append(y)
        return dist

    def path(self, tree: WeightedTree, u: int, v: int) -> List[int]:
        _, parent = rooted_order(tree.adjacency, u)
        walk = [v]
        while walk[-1] != u:
            walk.append(parent[walk[-1]])
        walk.reverse()
        return walk

    def leaf_distance(self, tree: WeightedTree, x: str, y: str) -> Fraction:
        u, v = tree.vertex(x), tree.vertex(y)
        if u == v:
            return Fraction(0)
        return self.vertex_distances(tree, u)[v]

    def distance_matrix(self, tree: WeightedTree) -> DistanceMatrix:
        labels = tree.leaf_labels
        rows = []
        for x in labels:
            dist = self.vertex_distances(tree, tree.vertex(x))
            rows.append(tuple(dist[tree.vertex(y)] for y in labels))
        return DistanceMatrix(labels=labels, d=tuple(rows))

    def total_length_pair_formula(self, tree: WeightedTree) -> Fraction:
        """
        Sum over leaf pairs of h(x, y) * r(x, y).

        h(x, y) is the product of 1/(deg(v) - 1) over the interior vertices v
        on the path from x to y, which is the chance that x and y are
        neighbors in a random circular ordering compatible with the tree.
        """
        if tree.n_leaves < 2:
            raise PreconditionError("the pair formula needs at least two leaves")
        total = Fraction(0)
        for x in tree.leaf_labels:
            source = tree.vertex(x)
            dist = {source: Fraction(0)}
            weight = {source: Fraction(1)}
            queue = deque([source])
            while queue:
                p = queue.popleft()
                factor = Fraction(1) if p == source else Fraction(1, tree.degree(p) - 1)
                for y, w in tree.adjacency[p].items():
                    if y not in dist:
                        dist[y] = dist[p] + w
                        weight[y] = weight[p] * factor
                        queue.append(y)
            for leaf in tree.labels:
                if leaf != source:
                    total += weight[leaf] * dist[leaf]
        return total / 2

    # Restriction and surgery

    def subtree_restriction(
        self, tree: WeightedTree, labels: Iterable[str], suppress: bool = True
    ) -> WeightedTree:
        """
        Restrict a tree to the Steiner subtree spanned by a leaf set.

        Args:
            tree (WeightedTree): Source tree
            labels (Iterable[str]): Leaf labels K with |K| >= 2
            suppress (bool): Merge the edges around degree-2 vertices (default True)

        Returns:
            WeightedTree: Restricted tree; labels, the mark (if kept) and the root
                (if it keeps degree >= 2) are preserved
        """
        targets = {tree.vertex(label) for label in labels}
        if len(targets) < 2:
            raise PreconditionError("subtree_restriction needs at least two leaves")
        edges = self._steiner_edges(tree, targets)
        kept = sorted({x for e in edges for x in e[:2]})
        builder = TreeBuilder()
        ids = {v: builder.add_vertex(tree.labels.get(v)) for v in kept}
        for p, v, w in edges:
            builder.add_edge(ids[p], ids[v], w)

        degree_in_subtree = {v: 0 for v in kept}
        for p, v, _ in edges:
            degree_in_subtree[p] += 1
            degree_in_subtree[v] += 1
        mark = tree.mark if tree.mark is not None and tree.vertex(tree.mark) in targets else None
        root = None
        if tree.root is not None and degree_in_subtree.get(tree.root, 0) >= 2:
            root = ids[tree.root]
        restricted = builder.build(mark=mark, root=root)
        return self.suppress_degree_two(restricted) if suppress else restricted

    def suppress_degree_two(self, tree: WeightedTree) -> WeightedTree:
        adjacency = {v: dict(nbrs) for v, nbrs in tree.adjacency.items()}
        for v in list(adjacency):
            if v == tree.root or len(adjacency[v]) != 2:
                continue
            (a, wa), (b, wb) = adjacency.pop(v).items()
            del adjacency[a][v]
            del adjacency[b][v]
            adjacency[a][b] = wa + wb
            adjacency[b][a] = wa + wb
        if len(adjacency) == len(tree.vertices):
            return tree
        builder = TreeBuilder()
        ids = {v: builder.add_vertex(tree.labels.get(v)) for v in sorted(adjacency)}
        for u in sorted(adjacency):
            for v, w in sorted(adjacency[u].items()):
                if u < v:
                    builder.add_edge(ids[u], ids[v], w)
        root = ids[tree.root] if tree.root is not None else None
        return builder.build(mark=tree.mark, root=root)

    def subdivide_edge(
        self, tree: WeightedTree, u: int, v: int, first_weight: Fraction
    ) -> WeightedTree:
        """Split edge (u, v) at distance ``first_weight`` from u, keeping its total weight."""
        if v not in tree.adjacency.get(u, {}):
            raise PreconditionError(f"({u},{v}) is not an edge")
        w = tree.weight(u, v)
        if not 0 < first_weight < w:
            raise PreconditionError(f"subdivision point {first_weight} must lie strictly inside (0, {w})")
        x = max(tree.vertices) + 1
        edges = [e for e in tree.edges if {e.u, e.v} != {u, v}]
        edges.append(Edge(u=u, v=x, weight=first_weight))
        edges.append(Edge(u=x, v=v, weight=w - first_weight))
        return WeightedTree(
            vertices=tree.vertices + (x,),
            edges=tuple(edges),
            labels=tree.labels,
            mark=tree.mark,
            root=tree.root,
        )

    # Structural predicates

    def is_simple(self, tree: WeightedTree) -> bool:
        return all(tree.degree(v) != 2 for v in tree.vertices)

    def is_combinatorial(self, tree: WeightedTree) -> bool:
        return all(e.weight == 1 for e in tree.edges)

    def is_k_valent(self, tree: WeightedTree, k: int) -> bool:
        if len(tree.vertices) < 2:
            return False
        return all(tree.degree(v) in (1, k + 1) for v in tree.vertices)

    def is_k_ary(self, tree: WeightedTree, k: int) -> bool:
        if tree.root is None:
            return False
        if len(tree.vertices) == 1:
            return True
        if tree.degree(tree.root) != k:
            return False
        return all(
            tree.degree(v) in (1, k + 1) for v in tree.vertices if v != tree.root
        )

    def is_caterpillar_structural(self, tree: WeightedTree) -> Optional[CaterpillarComposition]:
        """Composition (n_0, ..., n_l) read along the internal path, or None."""
        internal = [v for v in tree.vertices if not tree.is_leaf(v)]
        if not internal:
            return None
        internal_set = set(internal)
        spine = {v: [u for u in tree.adjacency[v] if u in internal_set] for v in internal}
        if any(len(nbrs) > 2 for nbrs in spine.values()):
            return None
        start = next(v for v in internal if len(spine[v]) <= 1)
        path = [start]
        previous = None
        while True:
            step = [u for u in spine[path[-1]] if u != previous]
            if not step:
                break
            previous = path[-1]
            path.append(step[0])
        counts = tuple(sum(1 for u in tree.adjacency[v] if tree.is_leaf(u)) for v in path)
        return CaterpillarComposition(counts=counts).canonical()

    def is_ultrametric(self, tree: WeightedTree) -> bool:
        if tree.n_leaves < 3:
            return True
        return self.is_ultrametric_matrix(self.distance_matrix(tree))

    def is_ultrametric_matrix(self, dm: DistanceMatrix) -> bool:
        d = dm.d
        for i, j, k in combinations(range(len(dm.labels)), 3):
            a, b, c = sorted((d[i][j], d[i][k], d[j][k]))
            if b != c:
                return False
        return True

    def four_point_holds(self, dm: DistanceMatrix) -> bool:
        d = dm.d
        size = len(dm.labels)
        for i, j, k in combinations(range(size), 3):
            if d[i][j] > d[i][k] + d[k][j] or d[i][k] > d[i][j] + d[j][k] or d[j][k] > d[j][i] + d[i][k]:
                return False
        for i, j, k, m in combinations(range(size), 4):
            sums = sorted((d[i][j] + d[k][m], d[i][k] + d[j][m], d[i][m] + d[j][k]))
            if sums[1] != sums[2]:
                return False
        return True

    def is_general_position(self, tree: WeightedTree) -> bool:
        """
        Check that all 2^|E| edge-subset sums are distinct.

        Raises:
            InfeasibleError: If the edge count exceeds the configured cap
        """
        m = len(tree.edges)
        if m > self.max_general_position_edges:
            raise InfeasibleError(
                f"general position test needs 2^{m} subset sums; cap is "
                f"{self.max_general_position_edges} edges (TREELEN_MAX_GENERAL_POSITION_EDGES)"
            )
        scale = common_denominator(e.weight for e in tree.edges)
        sums = {0}
        for e in tree.edges:
            w = int(e.weight * scale)
            shifted = {s + w for s in sums}
            if not shifted.isdisjoint(sums):
                return False
            sums |= shifted
        return True

    # Transforms

    def farris_transform(self, tree: WeightedTree, a: int, c) -> DistanceMatrix:
        """
        Farris transform of the leaf metric about vertex ``a``.

        r~(i, j) = c + (r(i, j) - r(a, i) - r(a, j)) / 2 for i != j, and 0 on the
        diagonal. The result is an ultrametric whenever c >= max_i r(a, i).

        Raises:
            PreconditionError: If ``a`` is not a vertex or c is too small
        """
        c = Fraction(c)
        if a not in tree.adjacency:
            raise PreconditionError(f"{a} is not a vertex")
        from_a = self.vertex_distances(tree, a)
        labels = tree.leaf_labels
        reach = max(from_a[tree.vertex(x)] for x in labels)
        if c < reach:
            raise PreconditionError(f"c = {c} is below max_i r(a, i) = {reach}")
        base = self.distance_matrix(tree)
        rows = []
        for i, x in enumerate(labels):
            row = []
            for j, y in enumerate(labels):
                if i == j:
                    row.append(Fraction(0))
                else:
                    row.append(
                        c + (base.d[i][j] - from_a[tree.vertex(x)] - from_a[tree.vertex(y)]) / 2
                    )
            rows.append(tuple(row))
        return DistanceMatrix(labels=labels, d=tuple(rows))

    def hat_weights(self, tree: WeightedTree) -> WeightedTree:
        """
        Reweight a rooted simple combinatorial tree by descendant counts.

        The edge from x down to y gets weight (#leaves below x - #leaves below y) / 2,
        counting strict descendants only, so the leaf metric becomes the number
        of leaves below the most recent common ancestor.

        Raises:
            PreconditionError: If the tree is unrooted, weighted, or has a
                non-root vertex of degree 2
        """
        if tree.root is None:
            raise PreconditionError("hat weights need a rooted tree")
        if not self.is_combinatorial(tree):
            raise PreconditionError("hat weights need a combinatorial tree")
        if any(tree.degree(v) == 2 for v in tree.vertices if v != tree.root):
            raise PreconditionError("hat weights need a simple tree")
        order, parent = rooted_order(tree.adjacency, tree.root)
        below = {v: 0 for v in order}
        for v in reversed(order):
            p = parent[v]
            if p is not None:
                below[p] += 1 if tree.is_leaf(v) else below[v]
        weights = {}
        for v in order:
            p = parent[v]
            if p is not None:
                weights[(p, v)] = Fraction(below[p] - below[v], 2)
        return tree.reweighted(weights)

    def centers(self, tree: WeightedTree) -> List[int]:
        """Vertices of minimum eccentricity, counting edges."""
        eccentricity = {}
        for v in tree.vertices:
            hops = {v: 0}
            queue = deque([v])
            while queue:
                x = queue.popleft()
                for y in tree.adjacency[x]:
                    if y not in hops:
                        hops[y] = hops[x] + 1
                        queue.append(y)
            eccentricity[v] = max(hops.values())
        best = min(eccentricity.values())
        return sorted(v for v, e in eccentricity.items() if e == best)


tree_service = TreeService()
