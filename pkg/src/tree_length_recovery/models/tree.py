from collections import deque
from fractions import Fraction
from functools import cached_property, total_ordering
import re
from typing import Annotated, Dict, List, Optional, Tuple

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PlainSerializer,
    PlainValidator,
    field_validator,
    model_validator,
)

from ..core.errors import UnknownLabelError
from ..utils.rational import format_rational, to_fraction


Rational = Annotated[
    Fraction,
    PlainValidator(to_fraction),
    PlainSerializer(format_rational, return_type=str),
]

LABEL_PATTERN = re.compile(r"^[A-Za-z0-9_.\-]+$")


# Tree Schemas
class Edge(BaseModel):
    model_config = ConfigDict(frozen=True)

    u: int
    v: int
    weight: Rational

    @field_validator("weight")
    @classmethod
    def positive_weight(cls, v: Fraction) -> Fraction:
        if v <= 0:
            raise ValueError(f"edge weight must be positive, got {v}")
        return v


class WeightedTree(BaseModel):
    """
    Finite tree with exact rational edge weights and labeled leaves.

    Leaves are exactly the degree-1 vertices (a single isolated vertex is
    also a leaf). A tree may carry either a mark, naming one of its leaves,
    or a root vertex of degree at least 2; never both.

    Derived structure (adjacency, leaf lookups) is cached per instance, so
    trees must be rebuilt rather than copied with updates.
    """

    model_config = ConfigDict(frozen=True)

    vertices: Tuple[int, ...] = Field(..., min_length=1)
    edges: Tuple[Edge, ...] = ()
    labels: Dict[int, str]
    mark: Optional[str] = None
    root: Optional[int] = None

    @model_validator(mode="after")
    def check_tree(self) -> "WeightedTree":
        vertex_set = set(self.vertices)
        if len(vertex_set) != len(self.vertices):
            raise ValueError("duplicate vertex ids")
        if len(self.edges) != len(self.vertices) - 1:
            raise ValueError(
                f"a tree on {len(self.vertices)} vertices needs {len(self.vertices) - 1} edges, "
                f"got {len(self.edges)}"
            )

        adjacency: Dict[int, Dict[int, Fraction]] = {v: {} for v in self.vertices}
        for edge in self.edges:
            if edge.u not in vertex_set or edge.v not in vertex_set:
                raise ValueError(f"edge ({edge.u},{edge.v}) uses an unknown vertex")
            if edge.u == edge.v:
                raise ValueError(f"self-loop at vertex {edge.u}")
            if edge.v in adjacency[edge.u]:
                raise ValueError(f"duplicate edge ({edge.u},{edge.v})")
            adjacency[edge.u][edge.v] = edge.weight
            adjacency[edge.v][edge.u] = edge.weight

        seen = {self.vertices[0]}
        queue = deque([self.vertices[0]])
        while queue:
            x = queue.popleft()
            for y in adjacency[x]:
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        if len(seen) != len(self.vertices):
            raise ValueError("tree is not connected")

        if len(self.vertices) == 1:
            expected_leaves = set(self.vertices)
        else:
            expected_leaves = {v for v, nbrs in adjacency.items() if len(nbrs) == 1}
        if set(self.labels) != expected_leaves:
            raise ValueError("labels must sit exactly on the degree-1 vertices")
        names = list(self.labels.values())
        if len(set(names)) != len(names):
            raise ValueError("leaf labels must be distinct")
        for name in names:
            if not LABEL_PATTERN.match(name):
                raise ValueError(f"invalid leaf label {name!r}")

        if self.mark is not None and self.root is not None:
            raise ValueError("a tree is either marked or rooted, not both")
        if self.mark is not None and self.mark not in names:
            raise ValueError(f"mark {self.mark!r} is not a leaf label")
        if self.root is not None:
            if self.root not in vertex_set:
                raise ValueError(f"root {self.root} is not a vertex")
            if len(self.vertices) > 1 and len(adjacency[self.root]) < 2:
                raise ValueError("the root must have degree at least 2")
        return self

    @cached_property
    def adjacency(self) -> Dict[int, Dict[int, Fraction]]:
        adjacency: Dict[int, Dict[int, Fraction]] = {v: {} for v in self.vertices}
        for edge in self.edges:
            adjacency[edge.u][edge.v] = edge.weight
            adjacency[edge.v][edge.u] = edge.weight
        return adjacency

    @cached_property
    def vertex_of(self) -> Dict[str, int]:
        return {label: v for v, label in self.labels.items()}

    @cached_property
    def leaf_labels(self) -> Tuple[str, ...]:
        return tuple(sorted(self.vertex_of))

    @property
    def n_leaves(self) -> int:
        return len(self.labels)

    @cached_property
    def total_length(self) -> Fraction:
        return sum((e.weight for e in self.edges), Fraction(0))

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def is_leaf(self, v: int) -> bool:
        return v in self.labels

    def vertex(self, label: str) -> int:
        try:
            return self.vertex_of[label]
        except KeyError:
            raise UnknownLabelError(label) from None

    def weight(self, u: int, v: int) -> Fraction:
        return self.adjacency[u][v]

    @property
    def is_marked(self) -> bool:
        return self.mark is not None

    @property
    def is_rooted(self) -> bool:
        return self.root is not None

    def with_mark(self, label: Optional[str]) -> "WeightedTree":
        if label is not None:
            self.vertex(label)
        return WeightedTree(
            vertices=self.vertices, edges=self.edges, labels=self.labels, mark=label
        )

    def with_root(self, vertex: Optional[int]) -> "WeightedTree":
        return WeightedTree(
            vertices=self.vertices, edges=self.edges, labels=self.labels, root=vertex
        )

    def plain(self) -> "WeightedTree":
        """The same tree without mark or root."""
        if self.mark is None and self.root is None:
            return self
        return WeightedTree(vertices=self.vertices, edges=self.edges, labels=self.labels)

    def reweighted(self, weights: Dict[Tuple[int, int], Fraction]) -> "WeightedTree":
        edges = []
        for e in self.edges:
            w = weights.get((e.u, e.v), weights.get((e.v, e.u), e.weight))
            edges.append(Edge(u=e.u, v=e.v, weight=w))
        return WeightedTree(
            vertices=self.vertices,
            edges=tuple(edges),
            labels=self.labels,
            mark=self.mark,
            root=self.root,
        )


class TreeBuilder:
    """Mutable scratchpad for assembling a WeightedTree vertex by vertex."""

    def __init__(self):
        self._edges: List[Edge] = []
        self._labels: Dict[int, str] = {}
        self._count = 0

    def add_vertex(self, label: Optional[str] = None) -> int:
        v = self._count
        self._count += 1
        if label is not None:
            self._labels[v] = label
        return v

    def set_label(self, v: int, label: str) -> None:
        self._labels[v] = label

    def add_edge(self, u: int, v: int, weight=1) -> None:
        self._edges.append(Edge(u=u, v=v, weight=weight))

    @property
    def vertex_count(self) -> int:
        return self._count

    def build(self, mark: Optional[str] = None, root: Optional[int] = None) -> WeightedTree:
        return WeightedTree(
            vertices=tuple(range(self._count)),
            edges=tuple(self._edges),
            labels=dict(self._labels),
            mark=mark,
            root=root,
        )


# Distance Schemas
class DistanceMatrix(BaseModel):
    model_config = ConfigDict(frozen=True)

    labels: Tuple[str, ...]
    d: Tuple[Tuple[Rational, ...], ...]

    @model_validator(mode="after")
    def check_matrix(self) -> "DistanceMatrix":
        size = len(self.labels)
        if len(set(self.labels)) != size:
            raise ValueError("distance matrix labels must be distinct")
        if len(self.d) != size or any(len(row) != size for row in self.d):
            raise ValueError("distance matrix must be square and match its labels")
        for i in range(size):
            if self.d[i][i] != 0:
                raise ValueError(f"nonzero diagonal entry for {self.labels[i]!r}")
            for j in range(i + 1, size):
                if self.d[i][j] != self.d[j][i]:
                    raise ValueError(f"asymmetric entry ({self.labels[i]}, {self.labels[j]})")
                if self.d[i][j] <= 0:
                    raise ValueError(
                        f"off-diagonal entry ({self.labels[i]}, {self.labels[j]}) must be positive"
                    )
        return self

    @cached_property
    def index(self) -> Dict[str, int]:
        return {label: i for i, label in enumerate(self.labels)}

    def distance(self, x: str, y: str) -> Fraction:
        try:
            return self.d[self.index[x]][self.index[y]]
        except KeyError as e:
            raise UnknownLabelError(str(e.args[0])) from None


# Isomorphism Schemas
@total_ordering
class CanonicalCode(BaseModel):
    model_config = ConfigDict(frozen=True)

    code: str

    def __lt__(self, other: "CanonicalCode") -> bool:
        return self.code < other.code

    def __str__(self) -> str:
        return self.code
