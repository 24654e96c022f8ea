import argparse
import logging

from ..core.errors import PreconditionError
from ..models.schemas import TreeMixture
from ..services.mixture_service import mixture_service
from ..utils.formats import format_mixture, parse_mixture_lines, read_distribution, write_distribution
from .common import add_class, add_input, add_output, open_input, open_output, tree_class_from

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("mixture", help="recover (or apply) a law over tree types")
    add_class(parser)
    parser.add_argument(
        "--forward",
        action="store_true",
        help="read 'code<TAB>p/q' lines and write the mixed distribution instead",
    )
    parser.add_argument("--n", type=int, default=None, help="leaf count (with --forward)")
    add_input(parser)
    add_output(parser)
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    tree_class = tree_class_from(args)
    if args.forward:
        if args.n is None:
            raise PreconditionError("mixture --forward needs --n")
        with open_input(args.input) as stream:
            weights = parse_mixture_lines(stream)
        mixture = TreeMixture(tree_class=tree_class, n=args.n, weights=weights)
        dist = mixture_service.forward_mix(mixture)
        with open_output(args.output) as out:
            write_distribution(dist, out)
        return 0

    with open_input(args.input) as stream:
        dist = read_distribution(stream)
    mixture = mixture_service.recover_mixture(dist, tree_class)
    logger.info(f"recovered a mixture over {len(mixture.weights)} types of {tree_class}")
    with open_output(args.output) as out:
        out.write(format_mixture(mixture))
    return 0
