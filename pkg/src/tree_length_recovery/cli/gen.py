import argparse
import logging

from ..core.errors import PreconditionError, TreeParseError
from ..models.schemas import CaterpillarComposition, TreeClass, TreeClassTag, WeightScheme
from ..services.caterpillar_service import caterpillar_service
from ..services.classgen_service import classgen_service
from ..services.reconstruction_service import star_tree
from ..utils.newick import format_tree
from ..utils.rational import parse_sequence
from .common import add_class, add_output, open_output, tree_class_from

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("gen", help="generate a tree or enumerate a class")
    add_class(parser, required=False)
    parser.add_argument("--n", type=int, default=None, help="number of leaves")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument(
        "--weights",
        default=WeightScheme.UNIT.value,
        help="weight scheme, or a comma list of star edge lengths",
    )
    parser.add_argument("--composition", default=None, help="caterpillar leaf counts, e.g. 1,2,1")
    parser.add_argument("--enumerate", action="store_true", help="dump every type of the class")
    add_output(parser)
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    with open_output(args.output) as out:
        if args.composition is not None:
            try:
                counts = tuple(int(c) for c in args.composition.split(","))
            except ValueError:
                raise TreeParseError(f"invalid composition {args.composition!r}") from None
            tree = caterpillar_service.caterpillar_tree(CaterpillarComposition(counts=counts))
            out.write(format_tree(tree) + "\n")
            return 0

        tree_class = tree_class_from(args)
        schemes = {s.value for s in WeightScheme}
        if args.weights not in schemes:
            if tree_class is not None and tree_class.tag != TreeClassTag.STAR:
                raise PreconditionError("explicit edge lengths only build stars")
            try:
                weights = parse_sequence(args.weights, sep=",")
            except ValueError:
                raise TreeParseError(f"invalid edge lengths {args.weights!r}") from None
            if args.n is not None and args.n != len(weights):
                raise PreconditionError(f"--n {args.n} but {len(weights)} edge lengths given")
            out.write(format_tree(star_tree(weights)) + "\n")
            return 0

        if tree_class is None or args.n is None:
            raise PreconditionError("gen needs --class and --n (or --composition / --weights)")
        if args.enumerate:
            classgen_service.dump_corpus(classgen_service.enumerate_class(tree_class, args.n), out)
            return 0
        tree = classgen_service.random_tree(tree_class, args.n, args.seed, WeightScheme(args.weights))
        logger.info(f"generated {tree_class} tree with {args.n} leaves from seed {args.seed}")
        out.write(format_tree(tree) + "\n")
    return 0
