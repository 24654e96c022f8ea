"""
Tree text format.

Newick-style nested parentheses with leaf labels and ``:len`` edge lengths,
where ``len`` is an integer, a decimal or a ``p/q`` rational::

    ((a:1,b:1):1/2,c:3/2);
    ((a:1,b:1):1,(c:1,d:1):1);@mark=a
    (a:1,b:1);@root

The optional trailer after ``;`` is ``@mark=<label>`` or ``@root`` (the
outermost node is the root). ``format_tree`` is deterministic, so text it
produced reads back and re-serializes to the same bytes.
"""

from typing import Optional

from pydantic import ValidationError

from ..core.errors import TreeParseError
from ..models.tree import TreeBuilder, WeightedTree
from .rational import format_rational, to_fraction

_DELIMITERS = set("(),:;")


class _Reader:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.builder = TreeBuilder()

    def peek(self) -> Optional[str]:
        return self.text[self.pos] if self.pos < len(self.text) else None

    def node(self) -> int:
        v = self.builder.add_vertex()
        if self.peek() == "(":
            self.pos += 1
            while True:
                child = self.node()
                if self.peek() != ":":
                    raise TreeParseError("expected ':' and an edge length", self.pos)
                self.pos += 1
                start = self.pos
                try:
                    self.builder.add_edge(v, child, self.length())
                except ValidationError as e:
                    raise TreeParseError(f"invalid edge: {e.errors()[0]['msg']}", start) from e
                c = self.peek()
                if c == ",":
                    self.pos += 1
                elif c == ")":
                    self.pos += 1
                    break
                else:
                    raise TreeParseError("expected ',' or ')'", self.pos)
        label = self.token()
        if label:
            self.builder.set_label(v, label)
        return v

    def token(self) -> str:
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] not in _DELIMITERS:
            self.pos += 1
        return self.text[start:self.pos].strip()

    def length(self):
        start = self.pos
        text = self.token()
        try:
            return to_fraction(text)
        except ValueError:
            raise TreeParseError(f"invalid edge length {text!r}", start) from None


def parse_tree(text: str) -> WeightedTree:
    """
    Parse the tree text format.

    Raises:
        TreeParseError: On malformed text or an invalid tree (the underlying
            validation message is kept)
    """
    text = text.strip()
    body, sep, trailer = text.partition(";")
    if not sep:
        raise TreeParseError("missing terminating ';'", len(text))
    reader = _Reader(body)
    top = reader.node()
    if reader.pos != len(body):
        raise TreeParseError("unexpected trailing characters", reader.pos)

    mark, root = None, None
    trailer = trailer.strip()
    if trailer == "@root":
        root = top
    elif trailer.startswith("@mark="):
        mark = trailer[len("@mark="):]
    elif trailer:
        raise TreeParseError(f"unknown trailer {trailer!r}", len(body) + 1)

    try:
        return reader.builder.build(mark=mark, root=root)
    except ValidationError as e:
        raise TreeParseError(f"invalid tree: {e.errors()[0]['msg']}") from e


def format_tree(tree: WeightedTree) -> str:
    if tree.root is not None:
        top = tree.root
    else:
        internal = [v for v in tree.vertices if not tree.is_leaf(v)]
        top = min(internal) if internal else min(tree.vertices)
    text = _render(tree, top, None) + ";"
    if tree.root is not None:
        text += "@root"
    elif tree.mark is not None:
        text += f"@mark={tree.mark}"
    return text


def _render(tree: WeightedTree, v: int, parent: Optional[int]) -> str:
    children = sorted(u for u in tree.adjacency[v] if u != parent)
    label = tree.labels.get(v, "")
    if not children:
        return label
    inner = ",".join(
        f"{_render(tree, c, v)}:{format_rational(tree.weight(v, c))}" for c in children
    )
    return f"({inner}){label}"
