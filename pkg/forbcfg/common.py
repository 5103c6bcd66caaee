"""Ground-set indexing and small value types shared by every module."""

from __future__ import annotations

from enum import StrEnum
from fractions import Fraction
from functools import cache
from itertools import combinations
from math import comb
from typing import Final

type Triple = tuple[int, int, int]
type Pair = tuple[int, int]
type Alpha = int | Fraction | float

EXACT_TYPES: Final = (int, Fraction)


class SearchStatus(StrEnum):
    """Whether a reported optimum is proven or only a lower bound."""

    EXACT = "exact"
    LOWER_BOUND = "lower_bound"


@cache
def triples(m: int) -> tuple[Triple, ...]:
    """Return all triples of the vertex set [m] = {1, ..., m}, sorted lexicographically."""
    return tuple(combinations(range(1, m + 1), 3))  # type: ignore[arg-type]


@cache
def pairs(m: int) -> tuple[Pair, ...]:
    """Return all pairs of [m], sorted lexicographically."""
    return tuple(combinations(range(1, m + 1), 2))  # type: ignore[arg-type]


@cache
def triple_index(m: int) -> dict[Triple, int]:
    """Map each triple of [m] to its position in `triples(m)`."""
    return {triple: index for index, triple in enumerate(triples(m))}


@cache
def pair_index(m: int) -> dict[Pair, int]:
    """Map each pair of [m] to its position in `pairs(m)`."""
    return {pair: index for index, pair in enumerate(pairs(m))}


def triple_count(m: int) -> int:
    """Return C(m, 3)."""
    return comb(m, 3)


def format_vertices(vertices: tuple[int, ...]) -> str:
    """Render vertices as the comma-separated keys used in the JSON file formats."""
    return ",".join(str(vertex) for vertex in vertices)


def parse_vertices(key: str, /) -> tuple[int, ...]:
    """Parse a JSON key such as `"1,2,3"` back into sorted vertices."""
    try:
        return tuple(sorted(int(part) for part in key.split(",")))
    except ValueError as err:
        raise ValueError(f"Invalid vertex key {key!r}") from err


def is_exact(alpha: Alpha, /) -> bool:
    """Return whether arithmetic with `alpha` stays exact."""
    return isinstance(alpha, EXACT_TYPES)


def parse_alpha(text: str, /) -> Alpha:
    """Parse an α value, keeping it exact whenever the text allows.

    `"2"` gives the integer 2, `"3/2"` and `"1.5"` give `Fraction(3, 2)`.
    """
    try:
        value = Fraction(text)
    except ValueError as err:
        raise ValueError(f"Invalid alpha {text!r}") from err

    return int(value) if value.denominator == 1 else value


def alpha_for_r(r: int, /) -> Fraction | int:
    """Return α_r = (r − 1)/(r − 2), the base that links forb(m, r, M) to TCM weights."""
    value = Fraction(r - 1, r - 2)
    return int(value) if value.denominator == 1 else value
