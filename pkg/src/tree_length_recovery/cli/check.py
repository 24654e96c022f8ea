import argparse
from fractions import Fraction
import logging

from ..core.errors import PreconditionError, UnknownLabelError
from ..models.tree import WeightedTree
from ..services.reconstruction_service import reconstruction_service
from ..services.tree_service import tree_service
from ..utils.rational import to_fraction
from .common import add_input, read_tree

logger = logging.getLogger(__name__)

PROPERTIES = {
    "simple": lambda tree, k: tree_service.is_simple(tree),
    "combinatorial": lambda tree, k: tree_service.is_combinatorial(tree),
    "k_valent": lambda tree, k: tree_service.is_k_valent(tree, k),
    "k_ary": lambda tree, k: tree_service.is_k_ary(tree, k),
    "caterpillar": lambda tree, k: tree_service.is_caterpillar_structural(tree) is not None,
    "ultrametric": lambda tree, k: tree_service.is_ultrametric(tree),
    "general_position": lambda tree, k: tree_service.is_general_position(tree),
}


def register(subparsers) -> None:
    parser = subparsers.add_parser("check", help="evaluate a structural predicate on a tree")
    parser.add_argument("--property", required=True, choices=sorted(PROPERTIES))
    parser.add_argument("--k", type=int, default=2)
    parser.add_argument(
        "--farris", default=None, help="check the Farris transform about this vertex id or leaf label"
    )
    parser.add_argument("--c", default=None, help="Farris constant (default: farthest leaf distance)")
    add_input(parser)
    parser.set_defaults(func=run)


def _vertex(tree: WeightedTree, name: str) -> int:
    if name in tree.vertex_of:
        return tree.vertex(name)
    try:
        v = int(name)
    except ValueError:
        raise UnknownLabelError(name) from None
    if v not in tree.adjacency:
        raise PreconditionError(f"{v} is not a vertex")
    return v


def run(args: argparse.Namespace) -> int:
    tree = read_tree(args.input)
    if args.farris is not None:
        a = _vertex(tree, args.farris)
        if args.c is not None:
            c = to_fraction(args.c)
        else:
            reach = tree_service.vertex_distances(tree, a)
            c = max((reach[tree.vertex(x)] for x in tree.leaf_labels), default=Fraction(0))
        dm = tree_service.farris_transform(tree, a, c)
        tree = reconstruction_service.tree_from_distances(dm)
        logger.debug(f"Farris transform about {args.farris} with c = {c}")
    result = PROPERTIES[args.property](tree, args.k)
    print("true" if result else "false")
    return 0
