"""
Line-oriented text formats.

Distribution files::

    n=4 total=24
    2 4 5<TAB>8
    3 4 5<TAB>16

Support points are written in lexicographic order; readers stream them.

Split sequence text: ``d:2,4,5 k=2`` or ``u:0,2 k=2``.

Mixture lines: ``<canonical code><TAB><p/q>``.
"""

from fractions import Fraction
from typing import IO, Dict, Iterator, Tuple

from pydantic import ValidationError

from ..core.errors import TreeParseError
from ..models.schemas import LengthDistribution, LengthSequence, SplitKind, TreeMixture
from .rational import format_sequence, parse_sequence, to_fraction


# Distribution files

def write_distribution(dist: LengthDistribution, stream: IO[str]) -> None:
    stream.write(f"n={dist.n} total={dist.total}\n")
    for seq, count in dist.sorted_items():
        stream.write(f"{format_sequence(seq)}\t{count}\n")


def read_header(line: str) -> Tuple[int, int]:
    fields: Dict[str, str] = {}
    for part in line.split():
        key, sep, value = part.partition("=")
        if not sep:
            raise TreeParseError(f"malformed header field {part!r}", 1)
        fields[key] = value
    try:
        return int(fields["n"]), int(fields["total"])
    except (KeyError, ValueError):
        raise TreeParseError("header must read 'n=<n> total=<total>'", 1) from None


def iter_distribution(stream: IO[str]) -> Tuple[int, int, Iterator[Tuple[LengthSequence, int]]]:
    """Header values plus a lazy iterator over (sequence, count) lines."""
    header = stream.readline()
    if not header.strip():
        raise TreeParseError("empty distribution file", 1)
    n, total = read_header(header)

    def lines() -> Iterator[Tuple[LengthSequence, int]]:
        for number, line in enumerate(stream, start=2):
            if not line.strip():
                continue
            values, sep, count = line.rstrip("\n").partition("\t")
            if not sep:
                raise TreeParseError("expected '<values>\\t<count>'", number)
            try:
                yield parse_sequence(values), int(count)
            except ValueError:
                raise TreeParseError(f"malformed support line {line.strip()!r}", number) from None

    return n, total, lines()


def read_distribution(stream: IO[str]) -> LengthDistribution:
    n, total, lines = iter_distribution(stream)
    entries: Dict[LengthSequence, int] = {}
    for seq, count in lines:
        if seq in entries:
            raise TreeParseError(f"duplicate support point {format_sequence(seq)}")
        entries[seq] = count
    try:
        return LengthDistribution(n=n, total=total, entries=entries)
    except ValidationError as e:
        raise TreeParseError(f"invalid distribution: {e.errors()[0]['msg']}") from e


# Split sequence text

def format_split_text(kind: SplitKind, values: Tuple[int, ...], k: int) -> str:
    prefix = "d" if kind == SplitKind.DOWN else "u"
    return f"{prefix}:{','.join(str(v) for v in values)} k={k}"


def parse_split_text(text: str) -> Tuple[SplitKind, Tuple[int, ...], int]:
    body, _, suffix = text.strip().partition(" ")
    kind_tag, sep, numbers = body.partition(":")
    if not sep or kind_tag not in ("d", "u"):
        raise TreeParseError("split text must start with 'd:' or 'u:'", 0)
    kind = SplitKind.DOWN if kind_tag == "d" else SplitKind.UP
    k = 2
    suffix = suffix.strip()
    if suffix:
        if not suffix.startswith("k="):
            raise TreeParseError(f"unexpected suffix {suffix!r}", len(body) + 1)
        try:
            k = int(suffix[2:])
        except ValueError:
            raise TreeParseError(f"invalid k in {suffix!r}", len(body) + 1) from None
    values = []
    position = 2
    for part in numbers.split(","):
        try:
            values.append(int(part))
        except ValueError:
            raise TreeParseError(f"invalid split value {part!r}", position) from None
        position += len(part) + 1
    return kind, tuple(values), k


# Mixture lines

def format_mixture(mixture: TreeMixture) -> str:
    return "".join(f"{code}\t{weight}\n" for code, weight in sorted(mixture.weights.items()))


def parse_mixture_lines(stream: IO[str]) -> Dict[str, Fraction]:
    weights = {}
    for number, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        code, sep, weight = line.rstrip("\n").partition("\t")
        if not sep:
            raise TreeParseError("expected '<code>\\t<p/q>'", number)
        try:
            weights[code] = to_fraction(weight)
        except ValueError:
            raise TreeParseError(f"invalid weight {weight!r}", number) from None
    return weights
