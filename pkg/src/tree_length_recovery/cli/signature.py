import argparse

from ..services.reconstruction_service import reconstruction_service
from ..utils.rational import format_sequence
from .common import add_input, read_tree


def register(subparsers) -> None:
    parser = subparsers.add_parser("signature", help="hat signature of a simple combinatorial tree")
    add_input(parser)
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    tree = read_tree(args.input)
    print(format_sequence(reconstruction_service.hat_signature(tree)))
    return 0
