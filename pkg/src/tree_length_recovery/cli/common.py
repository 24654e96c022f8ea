import argparse
from contextlib import contextmanager
from typing import IO, Iterator, Optional
import sys

from ..models.schemas import TreeClass, TreeClassTag
from ..models.tree import WeightedTree
from ..utils.newick import parse_tree


def add_input(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", "-i", default="-", help="input file ('-' for stdin)")


def add_output(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--output", "-o", default="-", help="output file ('-' for stdout)")


def add_class(parser: argparse.ArgumentParser, required: bool = True) -> None:
    parser.add_argument(
        "--class",
        dest="tree_class",
        required=required,
        choices=[tag.value for tag in TreeClassTag],
        help="a-priori tree class",
    )
    parser.add_argument("--k", type=int, default=None, help="branching parameter for k_valent / k_ary")


@contextmanager
def open_input(path: str) -> Iterator[IO[str]]:
    if path == "-":
        yield sys.stdin
    else:
        with open(path, encoding="utf-8") as stream:
            yield stream


@contextmanager
def open_output(path: str) -> Iterator[IO[str]]:
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as stream:
            yield stream


def read_tree(path: str) -> WeightedTree:
    with open_input(path) as stream:
        return parse_tree(stream.read())


def tree_class_from(args: argparse.Namespace) -> Optional[TreeClass]:
    if args.tree_class is None:
        return None
    tag = TreeClassTag(args.tree_class)
    if tag in (TreeClassTag.K_VALENT, TreeClassTag.K_ARY):
        return TreeClass(tag=tag, k=args.k if args.k is not None else 2)
    return TreeClass(tag=tag)
