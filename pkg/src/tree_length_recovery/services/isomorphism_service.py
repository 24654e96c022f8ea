"""
Canonical codes for edge-weighted trees.

A code is the minimum, over the admissible rootings, of a recursive
encoding in which every vertex lists its children's encodings in sorted
order, each prefixed by the weight of the edge leading to it. Marked trees
are only rooted at the mark and rooted trees only at their root, so codes
respect that extra structure. Leaf labels and vertex ids play no part.
"""

from typing import Dict, List
import logging

from ..models.tree import CanonicalCode, WeightedTree
from .tree_service import rooted_order

logger = logging.getLogger(__name__)


class IsomorphismService:
    def canonical_code(self, tree: WeightedTree) -> CanonicalCode:
        if tree.mark is not None:
            prefix, starts = "M", [tree.vertex(tree.mark)]
        elif tree.root is not None:
            prefix, starts = "R", [tree.root]
        else:
            prefix, starts = "U", list(tree.vertices)
        best = min(self._encode(tree, v) for v in starts)
        return CanonicalCode(code=prefix + best)

    def is_isomorphic(self, first: WeightedTree, second: WeightedTree) -> bool:
        if len(first.vertices) != len(second.vertices) or first.n_leaves != second.n_leaves:
            return False
        return self.canonical_code(first) == self.canonical_code(second)

    def _encode(self, tree: WeightedTree, root: int) -> str:
        order, parent = rooted_order(tree.adjacency, root)
        children: Dict[int, List[str]] = {v: [] for v in order}
        encoded: Dict[int, str] = {}
        for v in reversed(order):
            encoded[v] = "(" + "".join(sorted(children[v])) + ")"
            p = parent[v]
            if p is not None:
                children[p].append(f"{tree.weight(p, v)}:{encoded[v]}")
        return encoded[root]


isomorphism_service = IsomorphismService()
