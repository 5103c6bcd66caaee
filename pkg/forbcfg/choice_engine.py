"""Choices of forbidden 3×3 matrices per row triple, and forb(m, r, M) through them.

A choice assigns to every triple of rows one column from each of three complementary pairs.
Forbidding those three columns on every triple is what avoiding M amounts to, so forb(m, r, M)
is the maximum of forb(m, r, 𝓑) over choices 𝓑, and each forb(m, r, 𝓑) splits into a sum of
valid-column counts c(𝓑, X) over row subsets X.
"""

from __future__ import annotations

from collections import deque
from concurrent.futures import ProcessPoolExecutor
from enum import IntEnum, StrEnum
from functools import cache, cached_property
from itertools import chain, combinations, permutations, product
from json import JSONDecodeError, dumps, loads
from logging import getLogger
from math import comb
from typing import TYPE_CHECKING, Any, Final, Self

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator
from wg_utilities.functions import force_mkdir

from forbcfg.common import (
    SearchStatus,
    Triple,
    alpha_for_r,
    format_vertices,
    parse_vertices,
    pair_index,
    triple_count,
    triple_index,
    triples,
)
from forbcfg.config import Settings, get_settings
from forbcfg.exceptions import (
    BudgetExceededError,
    DomainError,
    InfeasibleSizeError,
    NotGoodChoiceError,
)
from forbcfg.matrix_core import RMatrix, matrix_from_columns
from forbcfg.tcm_opt import Tcm, tcm_of_choice

if TYPE_CHECKING:
    from collections.abc import Iterable, Iterator, Mapping, Sequence
    from fractions import Fraction
    from pathlib import Path

LOGGER = getLogger(__name__)

type Column = tuple[int, ...]
type Arc = tuple[int, int]


class Role(IntEnum):
    """Position of a row inside a sorted triple i < j < k."""

    FIRST = 0
    SECOND = 1
    THIRD = 2


type RoleArc = tuple[Role, Role]


class TripleKind(StrEnum):
    """What forbidding a triple's three columns does to the valid columns."""

    IDENTITY = "I"
    COMPLEMENT = "Ic"
    OUT_STAR = "A1-like"
    IN_STAR = "A2-like"

    @property
    def is_good(self) -> bool:
        """Return whether the kind is equivalent to two 0-implications."""
        return self in {TripleKind.OUT_STAR, TripleKind.IN_STAR}


# Pair p holds a unit column and its complement; selector bit p picks the member.
PAIR_COLUMNS: Final[tuple[tuple[Column, Column], ...]] = (
    ((1, 0, 0), (0, 1, 1)),
    ((0, 1, 0), (1, 0, 1)),
    ((0, 0, 1), (1, 1, 0)),
)

SELECTOR_COUNT: Final[int] = 8

THREE_BIT_COLUMNS: Final[tuple[Column, ...]] = tuple(product((0, 1), repeat=3))

CANDIDATE_ARC_PAIRS: Final[tuple[tuple[RoleArc, RoleArc], ...]] = tuple(
    combinations(permutations(Role, 2), 2),  # type: ignore[arg-type]
)


def _code(column: Column) -> int:
    return (column[0] << 2) | (column[1] << 1) | column[2]


def _columns_of(selector: int) -> tuple[Column, Column, Column]:
    first, second, third = (PAIR_COLUMNS[p][(selector >> p) & 1] for p in range(3))
    return first, second, third


def _obeys(arcs: Iterable[RoleArc], column: Column) -> bool:
    """A 0 at the tail of every arc forces a 0 at its head."""
    return all(column[tail] == 1 or column[head] == 0 for tail, head in arcs)


def _derive_arcs(selector: int) -> tuple[RoleArc, RoleArc] | None:
    """Find the arc pair whose 0-implications leave exactly the non-forbidden columns."""
    forbidden = set(_columns_of(selector))
    valid = frozenset(column for column in THREE_BIT_COLUMNS if column not in forbidden)

    matches = [
        arcs
        for arcs in CANDIDATE_ARC_PAIRS
        if frozenset(column for column in THREE_BIT_COLUMNS if _obeys(arcs, column)) == valid
    ]

    if len(matches) > 1:
        raise RuntimeError(f"Selector {selector} matches several arc pairs: {matches}")

    if not matches:
        return None

    (tail_a, head_a), (tail_b, head_b) = arcs = matches[0]
    if tail_a != tail_b and head_a != head_b:
        raise RuntimeError(f"Arcs of selector {selector} share neither head nor tail: {arcs}")

    return arcs


def _derive_kind(selector: int) -> TripleKind:
    if (arcs := ROLE_ARCS[selector]) is not None:
        return TripleKind.OUT_STAR if arcs[0][0] == arcs[1][0] else TripleKind.IN_STAR

    columns = set(PATTERN_COLUMNS[selector])
    if columns == {pair[0] for pair in PAIR_COLUMNS}:
        return TripleKind.IDENTITY

    if columns == {pair[1] for pair in PAIR_COLUMNS}:
        return TripleKind.COMPLEMENT

    raise RuntimeError(f"Selector {selector} forbids no arc pair and is neither I nor Ic")


PATTERN_COLUMNS: Final = tuple(_columns_of(selector) for selector in range(SELECTOR_COUNT))
ROLE_ARCS: Final = tuple(_derive_arcs(selector) for selector in range(SELECTOR_COUNT))
TRIPLE_KINDS: Final = tuple(_derive_kind(selector) for selector in range(SELECTOR_COUNT))
FORBIDDEN_CODES: Final = tuple(
    frozenset(_code(column) for column in columns) for columns in PATTERN_COLUMNS
)
GOOD_SELECTORS: Final = tuple(
    selector for selector in range(SELECTOR_COUNT) if TRIPLE_KINDS[selector].is_good
)
SELECTOR_BY_ARCS: Final = {
    frozenset(arcs): selector for selector, arcs in enumerate(ROLE_ARCS) if arcs is not None
}


def _edge_option(selector: int) -> int:
    """Index (0 = ab, 1 = ac, 2 = bc) of the pair a good pattern leaves unjoined."""
    (tail_a, head_a), (tail_b, head_b) = ROLE_ARCS[selector]  # type: ignore[misc]
    (shared,) = {tail_a, head_a} & {tail_b, head_b}
    edge = tuple(role for role in Role if role != shared)
    return ((Role.FIRST, Role.SECOND), (Role.FIRST, Role.THIRD), (Role.SECOND, Role.THIRD)).index(
        edge,  # type: ignore[arg-type]
    )


EDGE_OPTION: Final = {selector: _edge_option(selector) for selector in GOOD_SELECTORS}
SELECTORS_BY_EDGE_OPTION: Final = tuple(
    tuple(selector for selector in GOOD_SELECTORS if EDGE_OPTION[selector] == option)
    for option in range(3)
)


class TriplePattern(BaseModel):
    """The 3×3 matrix B_{i,j,k} placed on one triple, identified by its 3-bit selector."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    selector: int = Field(ge=0, lt=SELECTOR_COUNT)

    @property
    def columns(self) -> tuple[Column, Column, Column]:
        """Return the three forbidden (0,1)-columns, one per pair."""
        return PATTERN_COLUMNS[self.selector]

    @property
    def kind(self) -> TripleKind:
        """Return I, Ic, or which of the two good shapes the pattern is."""
        return TRIPLE_KINDS[self.selector]

    @property
    def is_good(self) -> bool:
        """Return whether the pattern is neither I nor Ic."""
        return self.kind.is_good

    @classmethod
    def from_columns(cls, columns: Iterable[Column]) -> Self:
        """Identify the pattern whose forbidden columns are exactly `columns`."""
        wanted = {tuple(column) for column in columns}
        for selector, pattern_columns in enumerate(PATTERN_COLUMNS):
            if set(pattern_columns) == wanted:
                return cls(selector=selector)

        raise ValueError(f"{sorted(wanted)} is not one column from each complementary pair")

    @classmethod
    def from_matrix(cls, matrix: RMatrix) -> Self:
        """Identify the pattern of a 3×3 matrix such as A₁ or A₂."""
        return cls.from_columns(matrix.columns)

    @classmethod
    def of_kind(cls, kind: TripleKind) -> Self:
        """Return the lowest selector of a kind (the only one, for I and Ic)."""
        return cls(selector=TRIPLE_KINDS.index(kind))


def implied_arcs(p: TriplePattern) -> tuple[RoleArc, RoleArc] | None:
    """Return the two 0-implication arcs of a good pattern, or None for I and Ic."""
    return ROLE_ARCS[p.selector]


def triple_arcs(triple: Triple, selector: int) -> tuple[Arc, Arc] | None:
    """Return a pattern's arcs with roles replaced by the triple's vertices."""
    if (arcs := ROLE_ARCS[selector]) is None:
        return None

    (tail_a, head_a), (tail_b, head_b) = arcs
    return (triple[tail_a], triple[head_a]), (triple[tail_b], triple[head_b])


def selector_for_arcs(triple: Triple, arcs: Iterable[Arc]) -> int:
    """Return the selector whose arcs on `triple` are exactly `arcs`."""
    role_of = {vertex: Role(position) for position, vertex in enumerate(triple)}
    key = frozenset((role_of[tail], role_of[head]) for tail, head in arcs)

    try:
        return SELECTOR_BY_ARCS[key]
    except KeyError as err:
        raise ValueError(f"No pattern on {triple} has arcs {sorted(arcs)}") from err


class Choice(BaseModel):
    """A choice 𝓑: one selector per triple of [m], stored in lexicographic triple order."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    m: int = Field(ge=0)
    selectors: tuple[int, ...] = ()

    @model_validator(mode="after")
    def _validate_domain(self) -> Self:
        if len(self.selectors) != (expected := triple_count(self.m)):
            raise ValueError(
                f"A choice on {self.m} vertices needs {expected} selectors, "
                f"got {len(self.selectors)}",
            )

        if any(not 0 <= selector < SELECTOR_COUNT for selector in self.selectors):
            raise ValueError(f"Selectors must lie in 0..{SELECTOR_COUNT - 1}")

        return self

    @cached_property
    def bad_triples(self) -> tuple[Triple, ...]:
        """Return the triples that carry I or Ic."""
        return tuple(
            triple
            for triple, selector in zip(triples(self.m), self.selectors, strict=True)
            if not TRIPLE_KINDS[selector].is_good
        )

    @property
    def is_good(self) -> bool:
        """Return whether no triple carries I or Ic."""
        return not self.bad_triples

    def require_good(self) -> None:
        """Raise `NotGoodChoiceError` for the first I/Ic triple, if any."""
        if self.bad_triples:
            raise NotGoodChoiceError(self.bad_triples[0])

    def selector(self, triple: Iterable[int]) -> int:
        """Return the selector of a triple given in any order."""
        key: Triple = tuple(sorted(triple))  # type: ignore[assignment]
        return self.selectors[triple_index(self.m)[key]]

    def pattern(self, triple: Iterable[int]) -> TriplePattern:
        """Return B_{i,j,k}."""
        return TriplePattern(selector=self.selector(triple))

    def kind(self, triple: Iterable[int]) -> TripleKind:
        """Return the kind of B_{i,j,k}."""
        return TRIPLE_KINDS[self.selector(triple)]

    def arcs_of(self, triple: Triple) -> tuple[Arc, Arc] | None:
        """Return the vertex arcs of a sorted triple, or None for I and Ic."""
        return triple_arcs(triple, self.selector(triple))

    def items(self) -> Iterator[tuple[Triple, int]]:
        """Iterate over (triple, selector) in lexicographic triple order."""
        return zip(triples(self.m), self.selectors, strict=True)

    def with_selectors(self, updates: Mapping[Triple, int]) -> Choice:
        """Return a copy with some triples reassigned."""
        index = triple_index(self.m)
        selectors = list(self.selectors)
        for triple, selector in updates.items():
            selectors[index[tuple(sorted(triple))]] = selector  # type: ignore[index]

        return Choice(m=self.m, selectors=tuple(selectors))

    @classmethod
    def from_mapping(cls, m: int, patterns: Mapping[Triple, int]) -> Self:
        """Build a choice from a complete triple → selector mapping."""
        missing = [triple for triple in triples(m) if triple not in patterns]
        if missing:
            raise ValueError(f"Choice on {m} vertices is missing triples {missing[:3]}...")

        return cls(m=m, selectors=tuple(patterns[triple] for triple in triples(m)))

    def to_json_dict(self) -> dict[str, Any]:
        """Serialise to `{"m": 5, "patterns": {"1,2,3": 4, ...}}`."""
        return {
            "m": self.m,
            "patterns": {format_vertices(triple): selector for triple, selector in self.items()},
        }

    @classmethod
    def from_json_dict(cls, data: Mapping[str, Any]) -> Self:
        """Parse the choice file format."""
        m = int(data["m"])
        patterns = {
            parse_vertices(key): int(selector) for key, selector in data["patterns"].items()
        }
        return cls.from_mapping(m, patterns)  # type: ignore[arg-type]


def load_choice(path: Path, /) -> Choice:
    """Read a choice file."""
    try:
        return Choice.from_json_dict(loads(path.read_text()))
    except JSONDecodeError as err:
        raise ValueError(f"Choice file {path} is not valid JSON") from err


def save_choice(choice: Choice, path: Path, /) -> None:
    """Write a choice file, creating parent directories as needed."""
    force_mkdir(path, path_is_file=True).write_text(dumps(choice.to_json_dict(), indent=2))


def _vertex_set(b: Choice, x: Iterable[int]) -> tuple[int, ...]:
    vertices = tuple(sorted(set(x)))
    if vertices and (vertices[0] < 1 or vertices[-1] > b.m):
        raise ValueError(f"Vertex set {vertices} is not a subset of [{b.m}]")

    return vertices


@cache
def _positions(n: int) -> tuple[tuple[int, int, int], ...]:
    return tuple(combinations(range(n), 3))  # type: ignore[arg-type]


def _constraints(b: Choice, vertices: Sequence[int]) -> list[tuple[int, int, int, frozenset[int]]]:
    """Bit shifts of each triple inside `vertices` plus its forbidden codes."""
    n = len(vertices)
    return [
        (
            n - 1 - p,
            n - 1 - q,
            n - 1 - s,
            FORBIDDEN_CODES[b.selector((vertices[p], vertices[q], vertices[s]))],
        )
        for p, q, s in _positions(n)
    ]


def _check_rows(vertices: Sequence[int], settings: Settings) -> None:
    if len(vertices) > settings.valid_columns_max_rows:
        raise InfeasibleSizeError(
            "vertex set X",
            len(vertices),
            settings.valid_columns_max_rows,
        )


def _valid_masks(b: Choice, vertices: Sequence[int]) -> Iterator[int]:
    constraints = _constraints(b, vertices)
    for mask in range(1 << len(vertices)):
        if all(
            ((((mask >> sp) & 1) << 2) | (((mask >> sq) & 1) << 1) | ((mask >> ss) & 1))
            not in codes
            for sp, sq, ss, codes in constraints
        ):
            yield mask


def valid_columns(
    b: Choice,
    x: Iterable[int],
    *,
    settings: Settings | None = None,
) -> tuple[Column, ...]:
    """Return every (0,1)-column on X that contains no column of any B_{i,j,k} inside X.

    Columns are indexed by the sorted vertices of X and listed in lexicographic order.
    """
    vertices = _vertex_set(b, x)
    _check_rows(vertices, settings or get_settings())

    n = len(vertices)
    return tuple(
        tuple((mask >> (n - 1 - position)) & 1 for position in range(n))
        for mask in _valid_masks(b, vertices)
    )


def count_valid_columns(
    b: Choice,
    x: Iterable[int],
    *,
    settings: Settings | None = None,
) -> int:
    """Return c(𝓑, X) by brute force."""
    vertices = _vertex_set(b, x)
    _check_rows(vertices, settings or get_settings())
    return sum(1 for _ in _valid_masks(b, vertices))


class ImplicationGraph(BaseModel):
    """The directed multigraph D_𝓑(X) of 0-implications, or its closure."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    vertices: tuple[int, ...]
    arcs: tuple[tuple[int, int], ...]
    closed: bool = False

    @cached_property
    def arc_set(self) -> frozenset[Arc]:
        """Return the arcs without multiplicity."""
        return frozenset(self.arcs)

    def adjacent(self, u: int, v: int) -> bool:
        """Return whether some arc joins u and v, in either direction."""
        return (u, v) in self.arc_set or (v, u) in self.arc_set

    def to_digraph(self) -> nx.DiGraph[int]:
        """Return the graph as a networkx digraph (parallel arcs merged)."""
        graph: nx.DiGraph[int] = nx.DiGraph()
        graph.add_nodes_from(self.vertices)
        graph.add_edges_from(self.arcs)
        return graph


def implication_graph(b: Choice, x: Iterable[int]) -> ImplicationGraph:
    """Build D_𝓑(X): two arcs for every good triple inside X, nothing for I and Ic."""
    vertices = _vertex_set(b, x)
    arcs: list[Arc] = []
    for triple in combinations(vertices, 3):
        if (pair := b.arcs_of(triple)) is not None:  # type: ignore[arg-type]
            arcs.extend(pair)

    return ImplicationGraph(vertices=vertices, arcs=tuple(arcs))


def nonedge_count(b: Choice, x: Iterable[int]) -> int:
    """Return n(𝓑, X): unordered pairs of X joined by no arc of D_𝓑(X)."""
    graph = implication_graph(b, x)
    return sum(1 for u, v in combinations(graph.vertices, 2) if not graph.adjacent(u, v))


def close_arcs(b: Choice, x: Iterable[int], arcs: Iterable[Arc]) -> ImplicationGraph:
    """Apply the three closure rules to `arcs` on X until nothing changes.

    1. ij and jk give ik.
    2. B_{i,j,k} = I and ij give ik.
    3. B_{i,j,k} = Ic and ij give kj.
    """
    vertices = _vertex_set(b, x)
    kinds = {triple: b.kind(triple) for triple in combinations(vertices, 3)}
    outgoing: dict[int, set[int]] = {vertex: set() for vertex in vertices}
    incoming: dict[int, set[int]] = {vertex: set() for vertex in vertices}
    queue: deque[Arc] = deque()

    def add(tail: int, head: int) -> None:
        if tail != head and head not in outgoing[tail]:
            outgoing[tail].add(head)
            incoming[head].add(tail)
            queue.append((tail, head))

    for tail, head in arcs:
        add(tail, head)

    while queue:
        i, j = queue.popleft()

        for k in tuple(outgoing[j]):
            add(i, k)

        for h in tuple(incoming[i]):
            add(h, j)

        for k in vertices:
            if k in {i, j}:
                continue

            kind = kinds[tuple(sorted((i, j, k)))]  # type: ignore[index]
            if kind is TripleKind.IDENTITY:
                add(i, k)
            elif kind is TripleKind.COMPLEMENT:
                add(k, j)

    return ImplicationGraph(
        vertices=vertices,
        arcs=tuple(sorted((tail, head) for tail in vertices for head in outgoing[tail])),
        closed=True,
    )


def closure(b: Choice, x: Iterable[int]) -> ImplicationGraph:
    """Return the closed graph D̄_𝓑(X)."""
    return close_arcs(b, x, implication_graph(b, x).arcs)


class BlockDecomposition(BaseModel):
    """Blocks of the closed graph, ordered so that arcs between blocks run forward."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    vertices: tuple[int, ...]
    blocks: tuple[tuple[int, ...], ...]
    special: tuple[bool, ...]

    @computed_field  # type: ignore[prop-decorator]
    @property
    def big_blocks(self) -> int:
        """Return b(𝓑, X), the number of blocks of size at least 2."""
        return sum(1 for block in self.blocks if len(block) > 1)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def special_blocks(self) -> int:
        """Return s(𝓑, X)."""
        return sum(self.special)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def bound(self) -> int:
        """Return |X| + b − s + 1, an upper bound on c(𝓑, X)."""
        return len(self.vertices) + self.big_blocks - self.special_blocks + 1

    @property
    def order(self) -> tuple[int, ...]:
        """Return the vertices block by block, ascending inside each block."""
        return tuple(vertex for block in self.blocks for vertex in block)


def block_decomposition(b: Choice, x: Iterable[int]) -> BlockDecomposition:
    """Split X into blocks of pairwise non-adjacent vertices of the closed graph.

    Blocks are ordered by how many other blocks they point into entirely, ties going to the
    block with the lowest vertex. A block is special when two of its vertices form an I triple
    with a vertex of an earlier block, or an Ic triple with a vertex of a later block.
    """
    graph = closure(b, x)
    vertices = graph.vertices

    adjacency: nx.Graph[int] = nx.Graph()
    adjacency.add_nodes_from(vertices)
    adjacency.add_edges_from(graph.arcs)
    groups = [
        tuple(sorted(component))
        for component in nx.connected_components(nx.complement(adjacency))
    ]

    for group in groups:
        if any(graph.adjacent(u, v) for u, v in combinations(group, 2)):
            raise RuntimeError(f"Non-adjacency is not transitive on {group} for {b}")

    def forward(source: tuple[int, ...], target: tuple[int, ...]) -> bool:
        return all((u, v) in graph.arc_set for u in source for v in target)

    out_degree = {
        group: sum(1 for other in groups if other is not group and forward(group, other))
        for group in groups
    }
    blocks = sorted(groups, key=lambda group: (-out_degree[group], group[0]))

    for earlier, later in combinations(blocks, 2):
        if not forward(earlier, later):
            raise RuntimeError(f"Blocks {earlier} and {later} are not ordered by the arcs")

    special = []
    for position, block in enumerate(blocks):
        before = [k for earlier in blocks[:position] for k in earlier]
        after = [k for later in blocks[position + 1 :] for k in later]
        special.append(
            any(
                any(b.kind((i, j, k)) is TripleKind.IDENTITY for k in before)
                or any(b.kind((i, j, k)) is TripleKind.COMPLEMENT for k in after)
                for i, j in combinations(block, 2)
            ),
        )

    return BlockDecomposition(vertices=vertices, blocks=tuple(blocks), special=tuple(special))


def block_bound(b: Choice, x: Iterable[int]) -> int:
    """Return |X| + b(𝓑, X) − s(𝓑, X) + 1, which bounds c(𝓑, X) for any choice."""
    return block_decomposition(b, x).bound


def _scc_count(b: Choice, vertices: tuple[int, ...]) -> int:
    condensed = nx.condensation(implication_graph(b, vertices).to_digraph())
    components = condensed.number_of_nodes()
    unrelated = comb(components, 2) - condensed.number_of_edges()
    return unrelated + components + 1


def c_scc(b: Choice, x: Iterable[int]) -> int:
    """Return c(𝓑, X) = n_t + t + 1 from the strongly connected components of D_𝓑(X).

    Valid columns are constant on each component, and a component may be 0 only if every
    component it points to is 0, so the valid columns are the down-sets of the condensation:
    the empty one, the t principal ones, and one more per unrelated pair of components.
    """
    b.require_good()
    return _scc_count(b, _vertex_set(b, x))


def _subsets(m: int) -> Iterator[tuple[int, ...]]:
    """Subsets of [m] by size, then lexicographically."""
    for size in range(m + 1):
        yield from combinations(range(1, m + 1), size)


def forb_from_choice(m: int, r: int, b: Choice, *, settings: Settings | None = None) -> int:
    """Return forb(m, r, 𝓑) = Σ_X c(𝓑, X)·(r − 2)^{m − |X|}.

    Args:
        m (int): number of rows; must match the choice
        r (int): alphabet size, at least 2
        b (Choice): the choice
        settings (Settings, optional): guards; defaults to the process settings

    Returns:
        int: the exact count
    """
    settings = settings or get_settings()

    if b.m != m:
        raise ValueError(f"Choice is on {b.m} vertices, not {m}")

    if r < 2:  # noqa: PLR2004
        raise DomainError(f"forb needs an alphabet of at least 2 symbols, got r={r}")

    if m > settings.forb_from_choice_max_m:
        raise InfeasibleSizeError("row count m", m, settings.forb_from_choice_max_m)

    count = _scc_count if b.is_good else _brute_count
    return sum(count(b, x) * (r - 2) ** (m - len(x)) for x in _subsets(m))


def _brute_count(b: Choice, vertices: tuple[int, ...]) -> int:
    return sum(1 for _ in _valid_masks(b, vertices))


def weighted_nonedge_sum(b: Choice, r: int) -> int:
    """Return Σ_X n(𝓑, X)·(r − 2)^{m − |X|}.

    For a good choice this equals (r − 2)^{m − 2} times the weight of its TCM at
    α = (r − 1)/(r − 2).
    """
    if r < 3:  # noqa: PLR2004
        raise DomainError(f"The non-edge sum is stated for r ≥ 3, got r={r}")

    return sum(nonedge_count(b, x) * (r - 2) ** (b.m - len(x)) for x in _subsets(b.m))


def forb_upper_from_tcm_weight(m: int, r: int, weight: Fraction | int) -> Fraction | int:
    """Return (r − 1)^m + m(r − 1)^{m − 1} + (r − 2)^{m − 2}·weight."""
    return (r - 1) ** m + m * (r - 1) ** (m - 1) + (r - 2) ** (m - 2) * weight


class ChoiceMode(StrEnum):
    """Which family of choices `forb_via_choices` maximises over."""

    ALL = "all"
    GOOD_ONLY = "good_only"
    SAMPLE = "sample"

    @property
    def pool(self) -> tuple[int, ...]:
        """Return the selectors each triple may take."""
        return GOOD_SELECTORS if self is ChoiceMode.GOOD_ONLY else tuple(range(SELECTOR_COUNT))


class ChoiceSearchResult(BaseModel):
    """The best choice found and its forb value."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    m: int
    r: int
    mode: ChoiceMode
    value: int
    choice: Choice
    tcm: Tcm | None
    status: SearchStatus
    evaluated: int


class _BranchBest(BaseModel):
    value: int
    selectors: tuple[int, ...]
    evaluated: int
    exhausted: bool


def _search_branch(
    m: int,
    r: int,
    pool: tuple[int, ...],
    first: int | None,
    budget: int | None,
    settings: Settings,
) -> _BranchBest:
    """Maximise over the choices whose first triple carries `first` (all, when None)."""
    count = triple_count(m)
    rest = product(pool, repeat=count - 1) if first is not None else product(pool, repeat=count)

    best_value = -1
    best: tuple[int, ...] = ()
    evaluated = 0
    for tail in rest:
        if budget is not None and evaluated >= budget:
            return _BranchBest(value=best_value, selectors=best, evaluated=evaluated, exhausted=True)

        selectors = (first, *tail) if first is not None else tail
        value = forb_from_choice(m, r, Choice(m=m, selectors=selectors), settings=settings)
        evaluated += 1
        if value > best_value:
            best_value, best = value, selectors

    return _BranchBest(value=best_value, selectors=best, evaluated=evaluated, exhausted=False)


def _scaled_weights(m: int, r: int) -> list[tuple[int, tuple[int, ...]]]:
    """(r − 2)^{m − 2}·w(𝒢, α_r) for every TCM, as integers, heaviest first."""
    index = pair_index(m)
    triple_pairs = [
        tuple(index[pair] for pair in combinations(triple, 2)) for triple in triples(m)
    ]
    term = [(r - 1) ** k * (r - 2) ** (m - 2 - k) for k in range(m - 1)]

    ranked = []
    for options in product(range(3), repeat=triple_count(m)):
        multiplicities = [0] * len(index)
        for slots, option in zip(triple_pairs, options, strict=True):
            multiplicities[slots[option]] += 1

        ranked.append((sum(term[k] for k in multiplicities), options))

    ranked.sort(key=lambda item: (-item[0], item[1]))
    return ranked


def _pruned_good_search(
    m: int,
    r: int,
    budget: int | None,
    settings: Settings,
) -> _BranchBest:
    """Maximise over good choices, visiting their TCMs by decreasing weight.

    A good choice has c(𝓑, X) ≤ n(𝓑, X) + |X| + 1 on every X, so its forb value is at most
    (r − 1)^m + m(r − 1)^{m − 1} + (r − 2)^{m − 2}·w(𝒢_𝓑, α_r). Once the incumbent reaches the
    bound of the next TCM, no remaining choice can beat it. Each TCM is first tried through a
    uniformly directed orientation, then through all 2^C(m,3) choices realising it.
    """
    if (size := 3 ** triple_count(m)) > settings.max_choices:
        raise InfeasibleSizeError("good choice family (TCMs)", size, settings.max_choices)

    base = (r - 1) ** m + m * (r - 1) ** (m - 1)
    best_value, best, evaluated = -1, (), 0

    for scaled, options in _scaled_weights(m, r):
        ceiling = base + scaled
        if ceiling <= best_value:
            break

        g = Tcm.from_options(m, options)
        oriented = uniform_orientation(g)
        candidates: Iterable[tuple[int, ...]] = product(
            *(SELECTORS_BY_EDGE_OPTION[option] for option in options),
        )
        if oriented is not None:
            candidates = chain((oriented.choice.selectors,), candidates)

        for selectors in candidates:
            if budget is not None and evaluated >= budget:
                return _BranchBest(
                    value=best_value,
                    selectors=best,
                    evaluated=evaluated,
                    exhausted=True,
                )

            value = forb_from_choice(m, r, Choice(m=m, selectors=selectors), settings=settings)
            evaluated += 1
            if value > best_value:
                best_value, best = value, selectors
                LOGGER.debug("New best %s from %s (bound %s)", value, g, ceiling)

            if best_value >= ceiling:
                break

    return _BranchBest(value=best_value, selectors=best, evaluated=evaluated, exhausted=False)


def _sample_selectors(
    count: int,
    pool: tuple[int, ...],
    samples: int,
    seed: int,
) -> Iterator[tuple[int, ...]]:
    rng = np.random.default_rng(seed)
    draws = rng.choice(np.array(pool), size=(samples, count))
    for row in draws:
        yield tuple(int(value) for value in row)


def forb_via_choices(  # noqa: PLR0913
    m: int,
    r: int,
    mode: ChoiceMode = ChoiceMode.ALL,
    *,
    samples: int | None = None,
    seed: int | None = None,
    budget: int | None = None,
    strict: bool = False,
    prune: bool = True,
    settings: Settings | None = None,
) -> ChoiceSearchResult:
    """Maximise forb_from_choice over a family of choices.

    Exhaustive runs send ties to the lexicographically least selector tuple, whatever the
    schedule. With `Settings.threads > 1` the choices are split by the first triple's selector
    across a process pool. A pruned good-only search (m, r ≥ 3) instead walks the TCMs by
    decreasing weight and returns the first maximiser it meets.

    Args:
        m (int): number of rows
        r (int): alphabet size
        mode (ChoiceMode): every choice, good choices only, or a seeded sample
        samples (int, optional): sample size, required for `ChoiceMode.SAMPLE`
        seed (int, optional): generator seed, required for `ChoiceMode.SAMPLE`
        budget (int, optional): maximum number of choices to evaluate
        strict (bool): raise `BudgetExceededError` instead of returning a lower bound
        prune (bool): bound good-only searches by TCM weight; the size guard then applies
            to the 3^C(m,3) TCMs rather than the 6^C(m,3) choices
        settings (Settings, optional): guards and thread count

    Returns:
        ChoiceSearchResult: the best choice, its value and, when it is good, its TCM
    """
    settings = settings or get_settings()
    budget = budget if budget is not None else settings.default_node_budget
    count = triple_count(m)
    pool = mode.pool

    if mode is ChoiceMode.SAMPLE:
        if samples is None or seed is None:
            raise ValueError("Sampling needs both a sample size and an explicit seed")

        best_value, best, evaluated, exhausted = -1, (), 0, False
        for selectors in _sample_selectors(count, pool, samples, seed):
            if budget is not None and evaluated >= budget:
                exhausted = True
                break

            value = forb_from_choice(m, r, Choice(m=m, selectors=selectors), settings=settings)
            evaluated += 1
            if value > best_value or (value == best_value and selectors < best):
                best_value, best = value, selectors

        branches = [
            _BranchBest(
                value=best_value,
                selectors=best,
                evaluated=evaluated,
                exhausted=exhausted,
            ),
        ]
    elif prune and mode is ChoiceMode.GOOD_ONLY and m >= 3 and r >= 3:  # noqa: PLR2004
        branches = [_pruned_good_search(m, r, budget, settings)]
    else:
        if (size := len(pool) ** count) > settings.max_choices:
            raise InfeasibleSizeError(f"{mode} choice family", size, settings.max_choices)

        firsts: list[int | None] = list(pool) if count else [None]
        share = None if budget is None else -(-budget // len(firsts))

        if settings.threads > 1 and len(firsts) > 1:
            LOGGER.debug("Splitting %s choices over %s workers", size, settings.threads)
            with ProcessPoolExecutor(max_workers=settings.threads) as executor:
                futures = [
                    executor.submit(_search_branch, m, r, pool, first, share, settings)
                    for first in firsts
                ]
                branches = [future.result() for future in futures]
        else:
            branches = [
                _search_branch(m, r, pool, first, share, settings) for first in firsts
            ]

    winner = min(
        (branch for branch in branches if branch.value >= 0),
        key=lambda branch: (-branch.value, branch.selectors),
    )
    choice = Choice(m=m, selectors=winner.selectors)
    exhausted = any(branch.exhausted for branch in branches)

    result = ChoiceSearchResult(
        m=m,
        r=r,
        mode=mode,
        value=winner.value,
        choice=choice,
        tcm=tcm_of_choice(choice) if choice.is_good else None,
        status=SearchStatus.LOWER_BOUND
        if exhausted or mode is ChoiceMode.SAMPLE
        else SearchStatus.EXACT,
        evaluated=sum(branch.evaluated for branch in branches),
    )

    if exhausted:
        LOGGER.warning(
            "forb_via_choices(%s, %s, %s) stopped after %s choices; %s is a lower bound",
            m,
            r,
            mode,
            result.evaluated,
            result.value,
        )
        if strict:
            raise BudgetExceededError(budget or result.evaluated, result.value, result)

    return result


class OrientedChoice(BaseModel):
    """A good choice realising a TCM, with the vertex order used to orient it."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    choice: Choice
    order: tuple[int, ...]
    uniformly_directed: bool


def orient_tcm(g: Tcm, order: Sequence[int] | None = None) -> OrientedChoice:
    """Realise a TCM as a good choice whose arcs follow a vertex order.

    In a triple whose chosen edge is xy, the arcs join the third vertex z to x and y. If z
    comes before both in the order the arcs leave z, if it comes after both they enter z.
    When z lies between x and y no orientation follows the order; the arcs then leave z and the
    result is flagged as not uniformly directed, an equality case the counting formula does not
    cover.
    """
    order = tuple(order) if order is not None else tuple(range(1, g.m + 1))
    if sorted(order) != list(range(1, g.m + 1)):
        raise ValueError(f"{order} is not an ordering of [{g.m}]")

    selectors, uniform = _orient(g, order)
    if not uniform:
        LOGGER.info("Choice for %s is not uniformly directed under %s", g, order)

    return OrientedChoice(
        choice=Choice(m=g.m, selectors=selectors),
        order=order,
        uniformly_directed=uniform,
    )


def _orient(g: Tcm, order: Sequence[int]) -> tuple[tuple[int, ...], bool]:
    rank = {vertex: position for position, vertex in enumerate(order)}
    uniform = True
    selectors = []
    for triple, (x, y) in g.items():
        (z,) = set(triple) - {x, y}
        if rank[z] > max(rank[x], rank[y]):
            arcs = ((x, z), (y, z))
        else:
            if rank[z] > min(rank[x], rank[y]):
                uniform = False
            arcs = ((z, x), (z, y))

        selectors.append(selector_for_arcs(triple, arcs))

    return tuple(selectors), uniform


def uniform_orientation(g: Tcm) -> OrientedChoice | None:
    """Search the vertex orders of [m] for one under which `g` is uniformly directed."""
    for order in permutations(range(1, g.m + 1)):
        selectors, uniform = _orient(g, order)
        if uniform:
            return OrientedChoice(
                choice=Choice(m=g.m, selectors=selectors),
                order=order,
                uniformly_directed=True,
            )

    return None


def choice_from_tcm(g: Tcm, order: Sequence[int] | None = None) -> Choice:
    """Return a good choice 𝓑 with 𝒢_𝓑 = g, uniformly directed whenever `order` allows it.

    Args:
        g (Tcm): the TCM; for the 2-recursive constructions the natural order 1..m is the
            order of the leaves of their split tree
        order (Sequence[int], optional): vertex order, defaults to 1..m

    Returns:
        Choice: the realising choice
    """
    return orient_tcm(g, order).choice


def reduce_bad_choice(b: Choice) -> Choice:
    """Replace every I/Ic triple by the in-star pattern along the block order of [m].

    Vertices are ordered block by block (ascending inside a block), and a replaced triple
    i ≺ j ≺ k receives the arcs i→k and j→k.
    """
    order = block_decomposition(b, range(1, b.m + 1)).order
    rank = {vertex: position for position, vertex in enumerate(order)}

    updates = {}
    for triple in b.bad_triples:
        i, j, k = sorted(triple, key=rank.__getitem__)
        updates[triple] = selector_for_arcs(triple, ((i, k), (j, k)))

    return b.with_selectors(updates)


def _witness_columns(m: int, r: int, b: Choice, settings: Settings) -> Iterator[Column]:
    for x in _subsets(m):
        outside = [row for row in range(1, m + 1) if row not in x]
        for column in valid_columns(b, x, settings=settings):
            on_x = dict(zip(x, column, strict=True))
            for word in product(range(2, r), repeat=len(outside)):
                entries = on_x | dict(zip(outside, word, strict=True))
                yield tuple(entries[row] for row in range(1, m + 1))


def witness_matrix(m: int, r: int, b: Choice, *, settings: Settings | None = None) -> RMatrix:
    """Build a simple matrix with forb(m, r, 𝓑) columns that avoids 𝓑.

    For every X, each valid column on X is extended by every word over {2, ..., r − 1} on the
    rows outside X.
    """
    settings = settings or get_settings()
    if m > settings.forb_from_choice_max_m:
        raise InfeasibleSizeError("row count m", m, settings.forb_from_choice_max_m)

    return matrix_from_columns(m, r, _witness_columns(m, r, b, settings))


def random_choice(m: int, rng: np.random.Generator, *, good_only: bool = False) -> Choice:
    """Draw a uniform choice (or a uniform good choice)."""
    pool = GOOD_SELECTORS if good_only else tuple(range(SELECTOR_COUNT))
    draws = rng.choice(np.array(pool), size=triple_count(m))
    return Choice(m=m, selectors=tuple(int(value) for value in draws))


def alpha_r(r: int) -> Fraction | int:
    """Return (r − 1)/(r − 2)."""
    if r < 3:  # noqa: PLR2004
        raise DomainError(f"α_r is defined for r ≥ 3, got r={r}")

    return alpha_for_r(r)
