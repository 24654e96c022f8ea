import argparse
import logging

from ..services.classgen_service import classgen_service
from .common import add_class, tree_class_from

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("oracle", help="run a desk-scale oracle")
    parser.add_argument("kind", choices=["injectivity"])
    add_class(parser)
    parser.add_argument("--n", type=int, required=True)
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    report = classgen_service.injectivity_oracle(tree_class_from(args), args.n)
    logger.info(f"{report.type_count} types, injective={report.injective}")
    print(report.model_dump_json(indent=2))
    return 0
