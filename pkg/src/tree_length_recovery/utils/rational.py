"""
Exact rational helpers shared by the text formats and the data models.

Lengths are written either as integers, decimals (``0.25``) or ``p/q``
fractions. Floats are rejected: every comparison in the library is exact.
"""

from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence, Tuple


def to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError("booleans are not lengths")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty rational")
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as e:
            raise ValueError(f"not a rational: {value!r}") from e
    raise ValueError(f"expected an exact rational, got {type(value).__name__}")


def format_rational(value: Fraction) -> str:
    return str(value)


def format_sequence(values: Sequence[Fraction], sep: str = " ") -> str:
    return sep.join(format_rational(v) for v in values)


def parse_sequence(text: str, sep: str = " ") -> Tuple[Fraction, ...]:
    parts = text.split(sep) if sep != " " else text.split()
    return tuple(to_fraction(p) for p in parts if p)


def common_denominator(values: Iterable[Fraction]) -> int:
    return lcm(1, *(v.denominator for v in values))
