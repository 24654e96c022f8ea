import argparse
import logging

from ..core.errors import PreconditionError, TreeParseError
from ..models.schemas import TreeClassTag
from ..services.caterpillar_service import caterpillar_service
from ..services.reconstruction_service import reconstruction_service
from ..utils.formats import iter_distribution, read_distribution
from ..utils.newick import format_tree
from .common import add_class, add_input, add_output, open_input, open_output, tree_class_from

logger = logging.getLogger(__name__)

# Classes rebuilt from the lexicographic minimum alone
_FROM_MINIMUM = {
    TreeClassTag.ULTRAMETRIC: reconstruction_service.reconstruct_ultrametric,
    TreeClassTag.COMBINATORIAL_HAT: reconstruction_service.combinatorial_from_hat_signature,
}


def register(subparsers) -> None:
    parser = subparsers.add_parser("reconstruct", help="rebuild a tree from its distribution")
    add_class(parser)
    add_input(parser)
    add_output(parser)
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    tree_class = tree_class_from(args)
    tag = tree_class.tag

    if tag in _FROM_MINIMUM:
        with open_input(args.input) as stream:
            _, _, lines = iter_distribution(stream)
            minimum = min((seq for seq, _ in lines), default=None)
        if minimum is None:
            raise TreeParseError("the distribution has no support points")
        tree = _FROM_MINIMUM[tag](minimum)
    else:
        with open_input(args.input) as stream:
            dist = read_distribution(stream)
        if tag == TreeClassTag.CATERPILLAR:
            composition = caterpillar_service.reconstruct_caterpillar(dist)
            with open_output(args.output) as out:
                out.write(f"{composition}\n")
            return 0
        if tag == TreeClassTag.STAR:
            tree = reconstruction_service.reconstruct_star(dist)
        elif tag == TreeClassTag.SMALL_N:
            tree = reconstruction_service.reconstruct_small_n(dist)
        elif tag == TreeClassTag.GENERAL_POSITION:
            tree = reconstruction_service.reconstruct_general_position(dist)
        elif tag == TreeClassTag.K_VALENT:
            tree = reconstruction_service.reconstruct_k_valent(dist, tree_class.k)
        elif tag == TreeClassTag.K_ARY:
            tree = reconstruction_service.reconstruct_k_ary(dist, tree_class.k)
        else:
            raise PreconditionError(f"no reconstructor for class {tree_class}")

    logger.info(f"reconstructed a {tree_class} tree with {tree.n_leaves} leaves")
    with open_output(args.output) as out:
        out.write(format_tree(tree) + "\n")
    return 0
