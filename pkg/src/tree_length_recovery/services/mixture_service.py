"""
Mixture service.

A random tree drawn from a law over the isomorphism types of a
(k+1)-valent or rooted k-ary class, followed by a random leaf ordering,
yields a mixed length-sequence distribution. Ordering the types by their
minimal split sequences s^T makes the matrix A[j][i] = P_{T_j}{W = s^{T_i}}
triangular with a positive diagonal, so the mixture weights follow by
forward substitution.
"""

from fractions import Fraction
from typing import Dict, List, Tuple
import logging

from ..core.errors import InputNotInModelError, InternalConsistencyError, PreconditionError
from ..models.schemas import LengthDistribution, LengthSequence, TreeClass, TreeClassTag, TreeMixture
from ..models.tree import WeightedTree
from .classgen_service import classgen_service
from .length_service import length_service
from .reconstruction_service import same_law
from .split_service import split_service

logger = logging.getLogger(__name__)

MIXABLE = {TreeClassTag.K_VALENT, TreeClassTag.K_ARY}


class MixtureService:
    def _types(self, tree_class: TreeClass, n: int) -> List[Tuple[str, WeightedTree, LengthSequence]]:
        """Class members with their signature events, in increasing signature order."""
        if tree_class.tag not in MIXABLE:
            raise PreconditionError(
                f"mixtures are only recovered for k_valent and k_ary classes, not {tree_class}"
            )
        enumeration = classgen_service.enumerate_class(tree_class, n)
        if not enumeration.items:
            raise PreconditionError(f"class {tree_class} has no trees with {n} leaves")
        k = tree_class.k
        rooted = tree_class.tag == TreeClassTag.K_ARY
        key = split_service.up_key(k) if rooted else split_service.down_key(k)
        members = []
        for code, tree in zip(enumeration.codes, enumeration.items):
            signature = split_service.split_signature(tree, k).values
            members.append((key(signature), code, tree, signature))
        members.sort(key=lambda m: m[0])
        return [
            (code, tree, tuple(Fraction(x) for x in (signature[1:] if rooted else signature)))
            for _, code, tree, signature in members
        ]

    def forward_mix(self, mixture: TreeMixture) -> LengthDistribution:
        """Distribution of the length sequence of a tree drawn from ``mixture``."""
        members = {code: tree for code, tree, _ in self._types(mixture.tree_class, mixture.n)}
        unknown = set(mixture.weights) - set(members)
        if unknown:
            raise PreconditionError(f"codes outside class {mixture.tree_class}: {sorted(unknown)}")
        return length_service.mix_distributions(
            [
                (weight, length_service.exact_distribution(members[code]))
                for code, weight in sorted(mixture.weights.items())
                if weight > 0
            ]
        )

    def recover_mixture(self, dist: LengthDistribution, tree_class: TreeClass) -> TreeMixture:
        """
        Solve b = x A for the mixture weights x.

        b_i is the probability of the i-th signature under ``dist`` and A[j][i]
        its probability under the j-th type.

        Raises:
            InputNotInModelError: If the solution is not a probability vector
                or does not reproduce ``dist``
        """
        members = self._types(tree_class, dist.n)
        laws = [length_service.exact_distribution(tree) for _, tree, _ in members]
        events = [event for _, _, event in members]
        b = [dist.probability(event) for event in events]

        x: List[Fraction] = []
        for i, event in enumerate(events):
            diagonal = laws[i].probability(event)
            if diagonal == 0:
                raise InternalConsistencyError(f"type {members[i][0]} misses its own signature")
            spill = sum((x[j] * laws[j].probability(event) for j in range(i)), Fraction(0))
            x.append((b[i] - spill) / diagonal)
        logger.debug(f"mixture weights {[str(w) for w in x]}")

        if any(w < 0 for w in x) or sum(x) != 1:
            raise InputNotInModelError(
                f"recovered weights {[str(w) for w in x]} are not a probability vector"
            )
        weights: Dict[str, Fraction] = {code: w for (code, _, _), w in zip(members, x)}
        mixture = TreeMixture(tree_class=tree_class, n=dist.n, weights=weights)
        mixed = length_service.mix_distributions([(w, law) for w, law in zip(x, laws) if w > 0])
        if not same_law(mixed, dist):
            raise InputNotInModelError(f"the distribution is not a mixture over class {tree_class}")
        return mixture


mixture_service = MixtureService()
