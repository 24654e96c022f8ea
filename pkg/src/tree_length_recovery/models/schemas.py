from enum import Enum
from fractions import Fraction
from math import factorial
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .tree import Rational, WeightedTree


LengthSequence = Tuple[Fraction, ...]


# Length Distribution Schemas
class LengthDistribution(BaseModel):
    """
    Exact law of a random length sequence (W_2, ..., W_n).

    ``entries`` maps each support sequence to the number of leaf orderings
    producing it; ``total`` is the number of orderings counted (n! for a plain
    distribution, (n-1)! for a marked one, a scaled total for mixtures).
    """

    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1)
    total: int = Field(..., gt=0)
    entries: Dict[Tuple[Rational, ...], int]

    @model_validator(mode="after")
    def check_entries(self) -> "LengthDistribution":
        if not self.entries:
            raise ValueError("a distribution needs at least one support point")
        running = 0
        for seq, count in self.entries.items():
            if count <= 0:
                raise ValueError(f"count for {seq} must be positive")
            if len(seq) != self.n - 1:
                raise ValueError(f"sequence {seq} has length {len(seq)}, expected {self.n - 1}")
            if any(a >= b for a, b in zip(seq, seq[1:])) or (seq and seq[0] <= 0):
                raise ValueError(f"sequence {seq} is not strictly increasing and positive")
            running += count
        if running != self.total:
            raise ValueError(f"counts sum to {running}, expected total {self.total}")
        return self

    def probability(self, seq: LengthSequence) -> Fraction:
        return Fraction(self.entries.get(tuple(seq), 0), self.total)

    def support(self) -> List[LengthSequence]:
        return sorted(self.entries)

    def sorted_items(self) -> List[Tuple[LengthSequence, int]]:
        return sorted(self.entries.items())

    @property
    def is_full_count(self) -> bool:
        return self.total == factorial(self.n)


class Constraint(BaseModel):
    """Equality event ``W_index - W_minus = value`` (``W_index = value`` when minus is None)."""

    model_config = ConfigDict(frozen=True)

    index: int = Field(..., ge=1)
    value: Rational
    minus: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def check_order(self) -> "Constraint":
        if self.minus is not None and self.minus >= self.index:
            raise ValueError("the subtracted coordinate must come before the index")
        return self


# Split Sequence Schemas
class SplitKind(str, Enum):
    DOWN = "down"
    UP = "up"


class SplitSequence(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: SplitKind
    k: int = Field(2, ge=2)
    values: Tuple[int, ...] = Field(..., min_length=1)
    split_indices: Tuple[int, ...] = ()

    @property
    def split_index(self) -> Optional[int]:
        return self.split_indices[0] if self.split_indices else None

    @property
    def n(self) -> int:
        """Leaf count of the tree the sequence describes (marks included)."""
        return len(self.values) + 1 if self.kind == SplitKind.DOWN else len(self.values)


# Tree Class Schemas
class TreeClassTag(str, Enum):
    STAR = "star"
    SMALL_N = "small_n"
    GENERAL_POSITION = "general_position"
    ULTRAMETRIC = "ultrametric"
    CATERPILLAR = "caterpillar"
    K_VALENT = "k_valent"
    K_ARY = "k_ary"
    COMBINATORIAL_HAT = "combinatorial_hat"
    SIMPLE_COMBINATORIAL = "simple_combinatorial"


class TreeClass(BaseModel):
    model_config = ConfigDict(frozen=True)

    tag: TreeClassTag
    k: Optional[int] = Field(default=None, ge=2)

    @model_validator(mode="after")
    def check_k(self) -> "TreeClass":
        if self.tag in (TreeClassTag.K_VALENT, TreeClassTag.K_ARY):
            if self.k is None:
                raise ValueError(f"class {self.tag.value} needs a branching parameter k")
        elif self.k is not None:
            raise ValueError(f"class {self.tag.value} takes no branching parameter")
        return self

    def __str__(self) -> str:
        return self.tag.value if self.k is None else f"{self.tag.value}(k={self.k})"


class WeightScheme(str, Enum):
    UNIT = "unit"
    GENERAL_POSITION = "general_position"
    ULTRAMETRIC = "ultrametric"
    RANDOM_RATIONAL = "random_rational"


class TreeMixture(BaseModel):
    """Probability law over the isomorphism types of one class, keyed by canonical code."""

    model_config = ConfigDict(frozen=True)

    tree_class: TreeClass
    n: int = Field(..., ge=1)
    weights: Dict[str, Rational]

    @field_validator("weights")
    @classmethod
    def check_weights(cls, v: Dict[str, Fraction]) -> Dict[str, Fraction]:
        if any(w < 0 for w in v.values()):
            raise ValueError("mixture weights must be nonnegative")
        if sum(v.values(), Fraction(0)) != 1:
            raise ValueError("mixture weights must sum to 1")
        return v


class ClassEnumeration(BaseModel):
    model_config = ConfigDict(frozen=True)

    tree_class: TreeClass
    n: int
    items: Tuple[WeightedTree, ...]
    codes: Tuple[str, ...]

    @model_validator(mode="after")
    def check_items(self) -> "ClassEnumeration":
        if len(self.items) != len(self.codes):
            raise ValueError("one canonical code per enumerated tree")
        if len(set(self.codes)) != len(self.codes):
            raise ValueError("enumerated trees must be pairwise non-isomorphic")
        return self


# Caterpillar Schemas
class CaterpillarComposition(BaseModel):
    """Leaf counts (n_0, ..., n_l) along the internal path of a caterpillar."""

    model_config = ConfigDict(frozen=True)

    counts: Tuple[int, ...] = Field(..., min_length=1)

    @field_validator("counts")
    @classmethod
    def check_counts(cls, v: Tuple[int, ...]) -> Tuple[int, ...]:
        if v[0] < 1 or v[-1] < 1:
            raise ValueError("both ends of the path need at least one leaf")
        if any(c < 0 for c in v):
            raise ValueError("leaf counts must be nonnegative")
        if sum(v) < 2:
            raise ValueError("a caterpillar needs at least two leaves")
        return v

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def path_length(self) -> int:
        return len(self.counts) - 1

    def reversed(self) -> "CaterpillarComposition":
        return CaterpillarComposition(counts=tuple(reversed(self.counts)))

    def canonical(self) -> "CaterpillarComposition":
        """The lexicographically smaller of the composition and its reversal."""
        flipped = tuple(reversed(self.counts))
        return self if self.counts <= flipped else CaterpillarComposition(counts=flipped)

    def same_class(self, other: "CaterpillarComposition") -> bool:
        return self.canonical().counts == other.canonical().counts

    def __str__(self) -> str:
        return "(" + ",".join(str(c) for c in self.counts) + ")"


class CaterpillarStatistics(BaseModel):
    """
    Exact statistics of the label walk K_r = W_r - r on a caterpillar.

    pair_probs[k] = P{K_2 = k}; triple_probs[r] = P{K_2 = r, K_3 = l} for
    1 <= r <= l/2; autocorrelation[k] = sum_r n_r n_{r+k};
    endpoint_run_probs[k] = P{K_2 = ... = K_k = 0, K_{k+1} = l}.
    """

    model_config = ConfigDict(frozen=True)

    n: int
    path_length: int
    pair_probs: Dict[int, Rational]
    triple_probs: Dict[int, Rational] = Field(default_factory=dict)
    autocorrelation: Dict[int, int] = Field(default_factory=dict)
    endpoint_run_probs: Dict[int, Rational] = Field(default_factory=dict)


# Report Schemas
class UltrametricDiagnostics(BaseModel):
    model_config = ConfigDict(frozen=True)

    max_radius: Rational
    ell_count: int
    p_values: Dict[int, Rational]


class WitnessReport(BaseModel):
    name: str
    statistic: str
    first: str
    second: str
    isomorphic: bool
    statistic_collides: bool


class InjectivityReport(BaseModel):
    tree_class: TreeClass
    n: int
    type_count: int
    injective: bool
    collisions: List[Tuple[str, str]] = Field(default_factory=list)
    witnesses: List[WitnessReport] = Field(default_factory=list)
