import argparse

from ..models.schemas import SplitKind
from ..services.split_service import split_service
from ..utils.formats import format_split_text, parse_split_text
from ..utils.newick import format_tree
from .common import add_input, read_tree


def register(subparsers) -> None:
    parser = subparsers.add_parser("split", help="minimal split sequence of a tree, or parse one")
    parser.add_argument("--k", type=int, default=None)
    parser.add_argument("--kind", choices=[kind.value for kind in SplitKind], default=None)
    parser.add_argument("--mark", default=None, help="leaf to mark for a down-split sequence")
    parser.add_argument("--parse", default=None, help="split text such as 'd:2,4,5 k=2'")
    add_input(parser)
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    if args.parse is not None:
        kind, values, k = parse_split_text(args.parse)
        if kind == SplitKind.DOWN:
            tree = split_service.parse_down_split(values, k)
        else:
            tree = split_service.parse_up_split(values, k)
        print(format_tree(tree))
        return 0

    tree = read_tree(args.input)
    kind = SplitKind(args.kind) if args.kind else (SplitKind.UP if tree.is_rooted else SplitKind.DOWN)
    mark = args.mark if args.mark is not None else tree.mark
    if kind == SplitKind.UP:
        result = split_service.min_up_split(tree, args.k)
    elif mark is not None:
        result = split_service.min_down_split(tree, mark, args.k)
    else:
        result = split_service.split_signature(tree.plain(), args.k)
    print(format_split_text(result.kind, result.values, result.k))
    return 0
