"""r-matrices, configuration containment and exact forb(m, r, F) by search."""

from __future__ import annotations

from collections import Counter
from enum import StrEnum, auto
from itertools import permutations, product
from json import JSONDecodeError, loads
from logging import getLogger
from math import comb
from pathlib import Path
from typing import TYPE_CHECKING, Any, Final, Self

import networkx as nx
from pydantic import BaseModel, ConfigDict, Field, model_validator

from forbcfg.common import SearchStatus
from forbcfg.config import Settings, get_settings
from forbcfg.exceptions import BudgetExceededError, DomainError, InfeasibleSizeError

if TYPE_CHECKING:
    from collections.abc import Callable, Iterable, Sequence

LOGGER = getLogger(__name__)

type Column = tuple[int, ...]

PROGRESS_INTERVAL: Final[int] = 250_000


class RMatrix(BaseModel):
    """An m-rowed matrix over the alphabet {0, ..., r − 1}, stored column by column."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    num_rows: int = Field(ge=0)
    alphabet: int = Field(ge=1)
    columns: tuple[tuple[int, ...], ...] = ()

    @model_validator(mode="after")
    def _validate_entries(self) -> Self:
        for index, column in enumerate(self.columns):
            if len(column) != self.num_rows:
                raise ValueError(
                    f"Column {index} has {len(column)} entries, expected {self.num_rows}",
                )

            if any(not 0 <= entry < self.alphabet for entry in column):
                raise ValueError(
                    f"Column {index} has an entry outside 0..{self.alphabet - 1}: {column}",
                )

        return self

    @property
    def num_columns(self) -> int:
        """Return |A|, the number of columns."""
        return len(self.columns)

    @property
    def is_simple(self) -> bool:
        """Return whether all columns are pairwise distinct."""
        return len(set(self.columns)) == len(self.columns)

    def __len__(self) -> int:
        """Return the number of columns."""
        return len(self.columns)

    def project(self, rows: Sequence[int]) -> RMatrix:
        """Return the matrix restricted to `rows`, taken in the given order."""
        return RMatrix(
            num_rows=len(rows),
            alphabet=self.alphabet,
            columns=tuple(tuple(column[row] for row in rows) for column in self.columns),
        )

    def row(self, index: int, /) -> tuple[int, ...]:
        """Return one row of the matrix."""
        return tuple(column[index] for column in self.columns)

    def to_json_dict(self) -> dict[str, Any]:
        """Serialise to the pattern file format."""
        return {
            "rows": self.num_rows,
            "alphabet": self.alphabet,
            "columns": [list(column) for column in self.columns],
        }

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> Self:
        """Parse the pattern file format `{"rows": m, "alphabet": r, "columns": [...]}`."""
        return cls.model_validate(
            {
                "num_rows": data["rows"],
                "alphabet": data["alphabet"],
                "columns": [tuple(column) for column in data["columns"]],
            },
        )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], *, alphabet: int = 2) -> Self:
        """Build a matrix from a list of rows."""
        if not rows:
            return cls(num_rows=0, alphabet=alphabet)

        return cls(
            num_rows=len(rows),
            alphabet=alphabet,
            columns=tuple(zip(*rows, strict=True)),
        )


class BuiltinPattern(StrEnum):
    """Named forbidden configurations accepted wherever a pattern file is."""

    M = "M"
    A1 = "A1"
    A2 = "A2"
    I = "I"  # noqa: E741
    IC = "Ic"
    K2 = "K2"
    K3 = "K3"


class ConfigPattern(RMatrix):
    """An r-matrix designated as a forbidden configuration F."""

    name: str | None = None

    @classmethod
    def m(cls) -> Self:
        """Return the 3×2 matrix M."""
        return cls._named("M", [[0, 1], [0, 1], [1, 0]])

    @classmethod
    def a1(cls) -> Self:
        """Return A₁; forbidding it is the pair of 0-implications first→second, first→third."""
        return cls._named("A1", [[0, 0, 0], [1, 0, 1], [1, 1, 0]])

    @classmethod
    def a2(cls) -> Self:
        """Return A₂; forbidding it is the pair of 0-implications first→third, second→third."""
        return cls._named("A2", [[0, 0, 1], [0, 1, 0], [1, 1, 1]])

    @classmethod
    def identity(cls) -> Self:
        """Return the 3×3 identity I."""
        return cls._named("I", [[1, 0, 0], [0, 1, 0], [0, 0, 1]])

    @classmethod
    def identity_complement(cls) -> Self:
        """Return Iᶜ, the entrywise complement of I."""
        return cls._named("Ic", [[0, 1, 1], [1, 0, 1], [1, 1, 0]])

    @classmethod
    def complete(cls, k: int) -> Self:
        """Return K_k, the k×2^k matrix with every (0,1)-column exactly once."""
        return cls(
            name=f"K{k}",
            num_rows=k,
            alphabet=2,
            columns=tuple(product((0, 1), repeat=k)),
        )

    @classmethod
    def from_matrix(cls, matrix: RMatrix, *, name: str | None = None) -> Self:
        """Designate an existing matrix as a pattern."""
        return cls(
            name=name,
            num_rows=matrix.num_rows,
            alphabet=matrix.alphabet,
            columns=matrix.columns,
        )

    @classmethod
    def _named(cls, name: str, rows: list[list[int]]) -> Self:
        return cls(
            name=name,
            num_rows=len(rows),
            alphabet=2,
            columns=tuple(zip(*rows, strict=True)),
        )

    @property
    def is_degenerate(self) -> bool:
        """Return whether the pattern has no rows or no columns."""
        return self.num_rows == 0 or self.num_columns == 0


BUILTIN_BUILDERS: Final[dict[BuiltinPattern, Callable[[], ConfigPattern]]] = {
    BuiltinPattern.M: ConfigPattern.m,
    BuiltinPattern.A1: ConfigPattern.a1,
    BuiltinPattern.A2: ConfigPattern.a2,
    BuiltinPattern.I: ConfigPattern.identity,
    BuiltinPattern.IC: ConfigPattern.identity_complement,
    BuiltinPattern.K2: lambda: ConfigPattern.complete(2),
    BuiltinPattern.K3: lambda: ConfigPattern.complete(3),
}


def pattern_by_name(name: str, /) -> ConfigPattern:
    """Return one of the builtin patterns by name."""
    try:
        return BUILTIN_BUILDERS[BuiltinPattern(name)]()
    except ValueError as err:
        raise ValueError(
            f"Unknown pattern {name!r}; expected one of {', '.join(BuiltinPattern)}",
        ) from err


def load_pattern(source: str | Path, /) -> ConfigPattern:
    """Resolve a builtin pattern name or read a pattern file."""
    if str(source) in {pattern.value for pattern in BuiltinPattern}:
        return pattern_by_name(str(source))

    path = Path(source)
    if not path.is_file():
        raise ValueError(
            f"{source!r} is neither a builtin pattern ({', '.join(BuiltinPattern)}) nor a file",
        )

    try:
        data = loads(path.read_text())
    except JSONDecodeError as err:
        raise ValueError(f"Pattern file {path} is not valid JSON") from err

    return ConfigPattern.from_matrix(RMatrix.from_json_dict(data), name=path.stem)


def _columns_matchable(pattern_columns: Sequence[Column], columns: Sequence[Column]) -> bool:
    """Decide whether every pattern column can be sent to a distinct equal column."""
    graph: nx.Graph[tuple[str, int]] = nx.Graph()
    pattern_nodes = [("f", index) for index in range(len(pattern_columns))]
    graph.add_nodes_from(pattern_nodes)
    graph.add_nodes_from(("a", index) for index in range(len(columns)))

    for f_index, f_column in enumerate(pattern_columns):
        targets = [index for index, column in enumerate(columns) if column == f_column]
        if not targets:
            return False

        graph.add_edges_from((("f", f_index), ("a", index)) for index in targets)

    matching = nx.bipartite.hopcroft_karp_matching(graph, top_nodes=pattern_nodes)
    return all(node in matching for node in pattern_nodes)


def contains_config(a: RMatrix, f: RMatrix) -> bool:
    """Decide F ≺ A: some submatrix of A is a row and column permutation of F.

    Every ordered selection of distinct rows of A is tried; for each, the columns of F are
    matched to distinct, equal projected columns of A by a bipartite matching, so repeated
    columns in F are handled.

    Args:
        a (RMatrix): the host matrix
        f (RMatrix): the pattern; it may be larger than `a`

    Returns:
        bool: True if `a` contains `f` as a configuration
    """
    if f.num_rows == 0 or f.num_columns == 0:
        return True

    if f.num_rows > a.num_rows or f.num_columns > a.num_columns:
        return False

    needed = set(f.columns)
    for rows in permutations(range(a.num_rows), f.num_rows):
        projected = [tuple(column[row] for row in rows) for column in a.columns]
        if needed.issubset(projected) and _columns_matchable(f.columns, projected):
            return True

    return False


class _ContainmentIndex:
    """Incremental F-containment test for a growing set of distinct columns.

    For each ordered row selection the index keeps a counter of projected columns that occur
    in F. A set contains F on a selection exactly when that counter dominates F's column
    multiset, because column compatibility is equality.
    """

    def __init__(self, num_rows: int, pattern: RMatrix) -> None:
        self.row_tuples = list(permutations(range(num_rows), pattern.num_rows))
        self.target = Counter(pattern.columns)
        self.counts: list[Counter[Column]] = [Counter() for _ in self.row_tuples]

    def creates_copy(self, column: Column) -> bool:
        """Return whether adding `column` would complete a copy of the pattern."""
        for rows, counts in zip(self.row_tuples, self.counts, strict=True):
            key = tuple(column[row] for row in rows)
            if key not in self.target:
                continue

            if all(
                counts[value] + (value == key) >= need for value, need in self.target.items()
            ):
                return True

        return False

    def add(self, column: Column) -> None:
        for rows, counts in zip(self.row_tuples, self.counts, strict=True):
            if (key := tuple(column[row] for row in rows)) in self.target:
                counts[key] += 1

    def remove(self, column: Column) -> None:
        for rows, counts in zip(self.row_tuples, self.counts, strict=True):
            if (key := tuple(column[row] for row in rows)) in self.target:
                counts[key] -= 1


class ForbResult(BaseModel):
    """The outcome of an exact forb(m, r, F) search."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    m: int
    r: int
    pattern: str | None
    value: int
    witness: RMatrix
    status: SearchStatus
    nodes: int


class _Step(StrEnum):
    ENTER = auto()
    UNDO_INCLUDE = auto()
    EXCLUDE = auto()


def candidate_columns(m: int, r: int) -> list[Column]:
    """Return all r^m columns: the all-(r − 1) column first, then lexicographic order."""
    top = (r - 1,) * m
    return [top, *(column for column in product(range(r), repeat=m) if column != top)]


def forb_exact(  # noqa: PLR0912
    m: int,
    r: int,
    f: ConfigPattern,
    *,
    budget: int | None = None,
    strict: bool = False,
    settings: Settings | None = None,
) -> ForbResult:
    """Compute forb(m, r, F) by include/exclude depth-first search over candidate columns.

    The search adds candidates in the order of `candidate_columns`, rejects any column that
    would complete a copy of F, and prunes a branch once the columns still undecided cannot
    lift it above the best set found so far.

    Args:
        m (int): number of rows
        r (int): alphabet size, at least 2
        f (ConfigPattern): the forbidden configuration
        budget (int, optional): maximum number of search nodes; defaults to the configured
            node budget
        strict (bool): raise `BudgetExceededError` instead of returning a lower bound when the
            budget runs out
        settings (Settings, optional): guards; defaults to the process settings

    Returns:
        ForbResult: the value, one extremal witness and whether the value is exact
    """
    settings = settings or get_settings()
    budget = budget if budget is not None else settings.default_node_budget

    if r < 2:  # noqa: PLR2004
        raise DomainError(f"forb needs an alphabet of at least 2 symbols, got r={r}")

    if f.is_degenerate:
        LOGGER.info("%s has no rows or no columns, so every matrix contains it", f.name or "F")
        return ForbResult(
            m=m,
            r=r,
            pattern=f.name,
            value=0,
            witness=RMatrix(num_rows=m, alphabet=r),
            status=SearchStatus.EXACT,
            nodes=0,
        )

    if (size := r**m) > settings.forb_exact_max_columns:
        raise InfeasibleSizeError("candidate column set r^m", size, settings.forb_exact_max_columns)

    candidates = candidate_columns(m, r)
    total = len(candidates)
    index = _ContainmentIndex(m, f)

    chosen: list[int] = []
    best: list[int] = []
    best_size = -1
    nodes = 0
    exhausted = False

    stack: list[tuple[int, _Step]] = [(0, _Step.ENTER)]
    while stack:
        position, step = stack.pop()

        if step is _Step.UNDO_INCLUDE:
            index.remove(candidates[position])
            chosen.pop()
            continue

        if step is _Step.EXCLUDE:
            stack.append((position + 1, _Step.ENTER))
            continue

        nodes += 1
        if budget is not None and nodes > budget:
            exhausted = True
            break

        if nodes % PROGRESS_INTERVAL == 0:
            LOGGER.debug("forb_exact(%s, %s): %s nodes, best %s", m, r, nodes, best_size)

        if len(chosen) + total - position <= best_size:
            continue

        if position == total:
            best_size = len(chosen)
            best = list(chosen)
            continue

        stack.append((position, _Step.EXCLUDE))
        if not index.creates_copy(column := candidates[position]):
            index.add(column)
            chosen.append(position)
            stack.append((position, _Step.UNDO_INCLUDE))
            stack.append((position + 1, _Step.ENTER))

    result = ForbResult(
        m=m,
        r=r,
        pattern=f.name,
        value=max(best_size, 0),
        witness=RMatrix(
            num_rows=m,
            alphabet=r,
            columns=tuple(candidates[position] for position in best),
        ),
        status=SearchStatus.LOWER_BOUND if exhausted else SearchStatus.EXACT,
        nodes=nodes,
    )

    if exhausted:
        LOGGER.warning(
            "forb_exact(%s, %s, %s) hit its budget of %s nodes; %s is a lower bound",
            m,
            r,
            f.name,
            budget,
            result.value,
        )
        if strict:
            raise BudgetExceededError(budget or nodes, result.value, result)

    return result


def sauer_bound(m: int, k: int) -> int:
    """Return Σ_{i<k} C(m, i), the value of forb(m, 2, K_k)."""
    return sum(comb(m, i) for i in range(k))


def at_most_one_zero_matrix(m: int, r: int) -> RMatrix:
    """Return all columns over {0, ..., r − 1} with at most one entry equal to 0.

    The matrix has (r − 1)^m + m(r − 1)^{m − 1} columns and contains no configuration of M,
    which gives the lower half of the elementary sandwich for forb(m, r, M).
    """
    return RMatrix(
        num_rows=m,
        alphabet=r,
        columns=tuple(
            column for column in product(range(r), repeat=m) if column.count(0) <= 1
        ),
    )


def matrix_from_columns(m: int, r: int, columns: Iterable[Column]) -> RMatrix:
    """Build a matrix from an iterable of columns."""
    return RMatrix(num_rows=m, alphabet=r, columns=tuple(columns))


