import argparse
import logging

from ..services.length_service import length_service
from ..utils.formats import write_distribution
from .common import add_input, add_output, open_output, read_tree

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("dist", help="exact length-sequence distribution of a tree")
    parser.add_argument("--mark", default=None, help="condition on this leaf being sampled first")
    add_input(parser)
    add_output(parser)
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    tree = read_tree(args.input)
    mark = args.mark if args.mark is not None else tree.mark
    if mark is not None:
        dist = length_service.marked_distribution(tree, mark)
    else:
        dist = length_service.exact_distribution(tree)
    logger.info(f"distribution over {dist.n} leaves with {len(dist.entries)} support points")
    with open_output(args.output) as out:
        write_distribution(dist, out)
    return 0
