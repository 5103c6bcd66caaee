"""Triangular choice multigraphs (TCMs): weights, exact maxima, local search, closed sets."""

from __future__ import annotations

from collections import Counter
from enum import StrEnum
from fractions import Fraction
from functools import cache, cached_property
from itertools import combinations, product
from json import JSONDecodeError, dumps, loads
from logging import getLogger
from math import comb
from typing import TYPE_CHECKING, Any, Final, Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator
from wg_utilities.functions import force_mkdir

from forbcfg.common import (
    Alpha,
    Pair,
    SearchStatus,
    Triple,
    format_vertices,
    is_exact,
    pair_index,
    pairs,
    parse_vertices,
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

if TYPE_CHECKING:
    from collections.abc import Iterable, Iterator, Mapping, Sequence
    from pathlib import Path

    from forbcfg.choice_engine import Choice

LOGGER = getLogger(__name__)

type Weight = int | Fraction | float

PROGRESS_INTERVAL: Final[int] = 200_000


def _triple_pairs(triple: Triple) -> tuple[Pair, Pair, Pair]:
    """Return the pairs of a sorted triple abc as (ab, ac, bc)."""
    a, b, c = triple
    return (a, b), (a, c), (b, c)


class Tcm(BaseModel):
    """A TCM 𝒢 on [m]: one chosen edge per triple, stored in lexicographic triple order."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    m: int = Field(ge=0)
    edges: tuple[Pair, ...] = ()

    @model_validator(mode="after")
    def _validate_edges(self) -> Self:
        if len(self.edges) != (expected := triple_count(self.m)):
            raise ValueError(
                f"A TCM on {self.m} vertices needs {expected} edges, got {len(self.edges)}",
            )

        for triple, edge in zip(triples(self.m), self.edges, strict=True):
            if edge not in _triple_pairs(triple):
                raise ValueError(f"Edge {edge} is not a sorted pair inside triple {triple}")

        return self

    @cached_property
    def multiplicities(self) -> tuple[int, ...]:
        """Return m_xy for every pair of [m], in lexicographic pair order."""
        index = pair_index(self.m)
        counts = [0] * comb(self.m, 2)
        for edge in self.edges:
            counts[index[edge]] += 1

        return tuple(counts)

    def multiplicity(self, x: int, y: int) -> int:
        """Return m_xy."""
        return self.multiplicities[pair_index(self.m)[(min(x, y), max(x, y))]]

    def edge(self, triple: Iterable[int]) -> Pair:
        """Return the edge chosen in a triple given in any order."""
        key: Triple = tuple(sorted(triple))  # type: ignore[assignment]
        return self.edges[triple_index(self.m)[key]]

    def items(self) -> Iterator[tuple[Triple, Pair]]:
        """Iterate over (triple, chosen edge) in lexicographic triple order."""
        return zip(triples(self.m), self.edges, strict=True)

    def with_edges(self, updates: Mapping[Triple, Pair]) -> Tcm:
        """Return a copy with some triples choosing other edges."""
        index = triple_index(self.m)
        edges = list(self.edges)
        for triple, edge in updates.items():
            edges[index[tuple(sorted(triple))]] = (min(edge), max(edge))  # type: ignore[index]

        return Tcm(m=self.m, edges=tuple(edges))

    @classmethod
    def from_mapping(cls, m: int, edges: Mapping[Triple, Pair]) -> Self:
        """Build a TCM from a complete triple → edge mapping."""
        try:
            chosen = tuple(
                (min(edges[triple]), max(edges[triple])) for triple in triples(m)
            )
        except KeyError as err:
            raise ValueError(f"TCM on {m} vertices has no edge for triple {err}") from err

        return cls(m=m, edges=chosen)

    @classmethod
    def from_options(cls, m: int, options: Iterable[int]) -> Self:
        """Build a TCM from per-triple option indices (0 = ab, 1 = ac, 2 = bc)."""
        return cls(
            m=m,
            edges=tuple(
                _triple_pairs(triple)[option]
                for triple, option in zip(triples(m), options, strict=True)
            ),
        )

    @classmethod
    def lexicographic_first(cls, m: int) -> Self:
        """Return the TCM choosing the smallest pair in every triple."""
        return cls.from_options(m, [0] * triple_count(m))

    def to_json_dict(self) -> dict[str, Any]:
        """Serialise to `{"m": 5, "edges": {"1,2,3": "1,2", ...}}`."""
        return {
            "m": self.m,
            "edges": {format_vertices(triple): format_vertices(edge) for triple, edge in self.items()},
        }

    @classmethod
    def from_json_dict(cls, data: Mapping[str, Any]) -> Self:
        """Parse the TCM file format."""
        edges = {
            parse_vertices(key): parse_vertices(value) for key, value in data["edges"].items()
        }
        return cls.from_mapping(int(data["m"]), edges)  # type: ignore[arg-type]

    def __str__(self) -> str:
        """Render as `Tcm(m=5; 123:12 124:12 ...)`."""
        body = " ".join(
            f"{''.join(map(str, triple))}:{''.join(map(str, edge))}" for triple, edge in self.items()
        )
        return f"Tcm(m={self.m}; {body})"


def load_tcm(path: Path, /) -> Tcm:
    """Read a TCM file."""
    try:
        return Tcm.from_json_dict(loads(path.read_text()))
    except JSONDecodeError as err:
        raise ValueError(f"TCM file {path} is not valid JSON") from err


def save_tcm(g: Tcm, path: Path, /) -> None:
    """Write a TCM file, creating parent directories as needed."""
    force_mkdir(path, path_is_file=True).write_text(dumps(g.to_json_dict(), indent=2))


def weight(g: Tcm, alpha: Alpha) -> Weight:
    """Return w(𝒢, α) = Σ_xy α^{m_xy}, exact when α is an int or a Fraction."""
    return sum((alpha**multiplicity for multiplicity in g.multiplicities), start=0)


def normalized(value: Weight, m: int, alpha: Alpha) -> Weight:
    """Return 2·value/(m·α^m), the scale on which h(m) and h₂(m) are tabulated."""
    if m < 1:
        raise DomainError(f"Normalisation needs m ≥ 1, got {m}")

    if is_exact(alpha) and is_exact(value):
        return Fraction(2 * value, m * alpha**m)  # type: ignore[arg-type]

    return 2 * float(value) / (m * float(alpha) ** m)


def all_tcms(m: int) -> Iterator[Tcm]:
    """Iterate over all 3^C(m,3) TCMs on [m]."""
    for options in product(range(3), repeat=triple_count(m)):
        yield Tcm.from_options(m, options)


def random_tcm(m: int, rng: np.random.Generator) -> Tcm:
    """Draw a TCM with every triple's edge uniform and independent."""
    return Tcm.from_options(m, (int(option) for option in rng.integers(0, 3, triple_count(m))))


def relabel(g: Tcm, permutation: Mapping[int, int] | Sequence[int]) -> Tcm:
    """Return the TCM obtained by renaming each vertex v to permutation[v].

    A sequence is read as the images of 1, ..., m in order.
    """
    image = (
        dict(permutation.items())
        if hasattr(permutation, "items")
        else dict(zip(range(1, g.m + 1), permutation, strict=True))  # type: ignore[arg-type]
    )
    if sorted(image) != list(range(1, g.m + 1)) or sorted(image.values()) != sorted(image):
        raise ValueError(f"{permutation} is not a permutation of [{g.m}]")

    return Tcm.from_mapping(
        g.m,
        {
            tuple(sorted(image[v] for v in triple)): tuple(sorted(image[v] for v in edge))  # type: ignore[misc]
            for triple, edge in g.items()
        },
    )


def tcm_of_choice(b: Choice) -> Tcm:
    """Return 𝒢_𝓑: in every triple, the pair not joined by either of its two arcs.

    Raises:
        NotGoodChoiceError: if some triple carries I or Ic
    """
    edges: dict[Triple, Pair] = {}
    for triple, _ in b.items():
        if (arcs := b.arcs_of(triple)) is None:
            raise NotGoodChoiceError(triple)

        (shared,) = set(arcs[0]) & set(arcs[1])
        edges[triple] = tuple(sorted(set(triple) - {shared}))  # type: ignore[assignment]

    return Tcm.from_mapping(b.m, edges)


# Exact search


class _Layer(BaseModel):
    """The triples containing vertex 0 of an n-vertex state, and how they feed the next state.

    A state is n vertices labelled 0..n−1 plus an offset per pair (multiplicity gathered from
    triples already decided). Deciding every triple through vertex 0 fixes the final
    multiplicity of each pair 0a and leaves an (n − 1)-vertex state on 1..n−1.
    """

    model_config = ConfigDict(frozen=True)

    n: int
    triples: tuple[Pair, ...]
    zero_pairs: tuple[int, ...]
    carried_pairs: tuple[int, ...]
    child_slot: tuple[int, ...]
    triple_slots: tuple[tuple[int, int, int], ...]

    def split(
        self,
        offsets: tuple[int, ...],
        assignment: Sequence[int],
    ) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Return the final multiplicities of the pairs 0a and the offsets of the child."""
        counts = [offsets[slot] for slot in self.zero_pairs]
        child = [offsets[slot] for slot in self.carried_pairs]
        for (a, b), option, slot in zip(self.triples, assignment, self.child_slot, strict=True):
            if option == 0:
                counts[a - 1] += 1
            elif option == 1:
                counts[b - 1] += 1
            else:
                child[slot] += 1

        return tuple(counts), tuple(child)

    def assignments(self, *, fix_first: bool = False) -> Iterator[tuple[int, ...]]:
        """Iterate over every way to decide this layer's triples."""
        if fix_first and self.triples:
            for rest in product(range(3), repeat=len(self.triples) - 1):
                yield (0, *rest)
        else:
            yield from product(range(3), repeat=len(self.triples))


@cache
def _layer(n: int) -> _Layer:
    index = {pair: slot for slot, pair in enumerate(combinations(range(n), 2))}
    child_index = {pair: slot for slot, pair in enumerate(combinations(range(1, n), 2))}
    layer_triples: tuple[Pair, ...] = tuple(combinations(range(1, n), 2))  # type: ignore[assignment]
    return _Layer(
        n=n,
        triples=layer_triples,
        zero_pairs=tuple(index[(0, a)] for a in range(1, n)),
        carried_pairs=tuple(index[pair] for pair in child_index),
        child_slot=tuple(child_index[pair] for pair in layer_triples),
        triple_slots=tuple(
            (index[(a, b)], index[(a, c)], index[(b, c)])
            for a, b, c in combinations(range(n), 3)
        ),
    )


class _BudgetSpentError(Exception):
    pass


class _LayeredSearch:
    """Memoised maximum of the weight over all completions of a state.

    G(n, offsets) is the largest Σ α^{multiplicity} reachable from a state; it is the best
    layer head (pairs through vertex 0) plus G of the child. A child whose optimistic bound
    cannot beat the best head + child found so far is skipped, so every memoised value is exact.
    """

    def __init__(self, m: int, alpha: Alpha, budget: int | None, tolerance: float) -> None:
        self.alpha = alpha
        self.powers = tuple(alpha**k for k in range(m + 1))
        self.increments = tuple(power * (alpha - 1) for power in self.powers)
        self.budget = budget
        self.tolerance = tolerance
        self.memo: dict[tuple[int, tuple[int, ...]], tuple[Weight, tuple[int, ...]]] = {}
        self.nodes = 0

    def tick(self) -> None:
        self.nodes += 1
        if self.budget is not None and self.nodes > self.budget:
            raise _BudgetSpentError

        if self.nodes % PROGRESS_INTERVAL == 0:
            LOGGER.debug("h_exact: %s nodes, %s states memoised", self.nodes, len(self.memo))

    def upper(self, n: int, offsets: tuple[int, ...]) -> Weight:
        """Bound G(n, offsets): every triple adds at most its best edge's last increment."""
        if (known := self.memo.get((n, offsets))) is not None:
            return known[0]

        total: Weight = sum((self.powers[offset] for offset in offsets), start=0)
        for first, second, third in _layer(n).triple_slots:
            top = max(offsets[first], offsets[second], offsets[third])
            total += self.increments[top + n - 3]

        return total

    def head(self, exponents: Iterable[int]) -> Weight:
        return sum((self.powers[exponent] for exponent in exponents), start=0)

    def best(self, n: int, offsets: tuple[int, ...]) -> tuple[Weight, tuple[int, ...]]:
        """Return G(n, offsets) and the layer assignment attaining it."""
        if n < 2:  # noqa: PLR2004
            return 0, ()

        if n == 2:  # noqa: PLR2004
            return self.powers[offsets[0]], ()

        if (known := self.memo.get((n, offsets))) is not None:
            return known

        layer = _layer(n)
        best_value: Weight | None = None
        best_assignment: tuple[int, ...] = ()
        for assignment in layer.assignments():
            value = self.evaluate(layer, offsets, assignment, best_value)
            if value is not None and (best_value is None or value > best_value):
                best_value, best_assignment = value, assignment

        result = (best_value if best_value is not None else 0, best_assignment)
        self.memo[(n, offsets)] = result
        return result

    def evaluate(
        self,
        layer: _Layer,
        offsets: tuple[int, ...],
        assignment: tuple[int, ...],
        incumbent: Weight | None,
    ) -> Weight | None:
        """Return head + G(child), or None when the child provably cannot beat `incumbent`."""
        self.tick()
        exponents, child = layer.split(offsets, assignment)
        head = self.head(exponents)
        if incumbent is not None and head + self.upper(layer.n - 1, child) <= incumbent:
            return None

        return head + self.best(layer.n - 1, child)[0]

    def same(self, left: Weight, right: Weight) -> bool:
        if is_exact(left) and is_exact(right):
            return left == right

        return abs(float(left) - float(right)) <= self.tolerance * max(1.0, abs(float(right)))

    def edges_of(
        self,
        labels: tuple[int, ...],
        assignment: Sequence[int],
    ) -> dict[Triple, Pair]:
        layer = _layer(len(labels))
        edges: dict[Triple, Pair] = {}
        for (a, b), option in zip(layer.triples, assignment, strict=True):
            x, y, z = labels[0], labels[a], labels[b]
            edges[(x, y, z)] = ((x, y), (x, z), (y, z))[option]

        return edges

    def reconstruct(self, m: int, assignment: tuple[int, ...]) -> Tcm:
        """Follow memoised best assignments down from a top-level assignment."""
        labels = tuple(range(1, m + 1))
        offsets = (0,) * comb(m, 2)
        edges: dict[Triple, Pair] = {}
        while len(labels) >= 3:  # noqa: PLR2004
            edges |= self.edges_of(labels, assignment)
            _, offsets = _layer(len(labels)).split(offsets, assignment)
            labels = labels[1:]
            if len(labels) >= 3:  # noqa: PLR2004
                assignment = self.best(len(labels), offsets)[1]

        return Tcm.from_mapping(m, edges)

    def ties(
        self,
        labels: tuple[int, ...],
        offsets: tuple[int, ...],
        target: Weight,
    ) -> Iterator[dict[Triple, Pair]]:
        """Yield the edges of every completion of a state whose weight equals `target`."""
        if len(labels) < 3:  # noqa: PLR2004
            yield {}
            return

        layer = _layer(len(labels))
        for assignment in layer.assignments():
            exponents, child = layer.split(offsets, assignment)
            rest = self.best(layer.n - 1, child)[0]
            if self.same(self.head(exponents) + rest, target):
                here = self.edges_of(labels, assignment)
                for below in self.ties(labels[1:], child, rest):
                    yield here | below


class HResult(BaseModel):
    """H(m, α) with one extremal TCM."""

    model_config = ConfigDict(extra="forbid", frozen=True, arbitrary_types_allowed=True)

    m: int
    alpha: Alpha
    value: Weight
    tcm: Tcm
    status: SearchStatus
    nodes: int


def _check_h_domain(m: int, alpha: Alpha, *, allow_large: bool, settings: Settings) -> None:
    if m < 1:
        raise DomainError(f"H(m, α) needs m ≥ 1, got {m}")

    if alpha < 1:
        raise DomainError(f"H(m, α) is searched for α ≥ 1, got {alpha}")

    if m > settings.h_exact_max_m and not allow_large:
        raise InfeasibleSizeError("exact search over m", m, settings.h_exact_max_m)


def h_exact(  # noqa: PLR0913
    m: int,
    alpha: Alpha,
    *,
    budget: int | None = None,
    strict: bool = False,
    allow_large: bool = False,
    settings: Settings | None = None,
) -> HResult:
    """Compute H(m, α) = max over TCMs of w(𝒢, α) exactly.

    The search decides the triples through the smallest remaining vertex together, then
    recurses on the other vertices with the multiplicities gathered so far, memoising
    identical states. Triple 123 is fixed to choose 12, which loses no optimum since any TCM
    can be relabelled inside {1, 2, 3} to do so.

    Args:
        m (int): vertex count, at most `Settings.h_exact_max_m` unless `allow_large`
        alpha (Alpha): base, at least 1; ints and Fractions give exact results
        budget (int, optional): maximum number of layer assignments to evaluate
        strict (bool): raise `BudgetExceededError` instead of returning a lower bound
        allow_large (bool): permit m above the configured guard (m = 7 is feasible but slow)
        settings (Settings, optional): guards and the float tie tolerance

    Returns:
        HResult: the value and an extremal TCM, or the best TCM found when the budget ran out
    """
    settings = settings or get_settings()
    budget = budget if budget is not None else settings.default_node_budget
    _check_h_domain(m, alpha, allow_large=allow_large, settings=settings)

    search = _LayeredSearch(m, alpha, budget, settings.float_tie_tolerance)

    if m < 3:  # noqa: PLR2004
        g = Tcm(m=m)
        return HResult(
            m=m,
            alpha=alpha,
            value=weight(g, alpha),
            tcm=g,
            status=SearchStatus.EXACT,
            nodes=0,
        )

    layer = _layer(m)
    zeros = (0,) * comb(m, 2)
    best_value: Weight | None = None
    best_assignment: tuple[int, ...] = ()
    exhausted = False
    try:
        for assignment in layer.assignments(fix_first=True):
            value = search.evaluate(layer, zeros, assignment, best_value)
            if value is not None and (best_value is None or value > best_value):
                best_value, best_assignment = value, assignment
    except _BudgetSpentError:
        exhausted = True

    if best_value is None:
        g = Tcm.lexicographic_first(m)
        best_value = weight(g, alpha)
    else:
        g = search.reconstruct(m, best_assignment)

    result = HResult(
        m=m,
        alpha=alpha,
        value=best_value,
        tcm=g,
        status=SearchStatus.LOWER_BOUND if exhausted else SearchStatus.EXACT,
        nodes=search.nodes,
    )

    if exhausted:
        LOGGER.warning(
            "h_exact(%s, %s) stopped after %s nodes; %s is a lower bound",
            m,
            alpha,
            search.nodes,
            best_value,
        )
        if strict:
            raise BudgetExceededError(budget or search.nodes, float(best_value), result)
    else:
        LOGGER.info("H(%s, %s) = %s after %s nodes", m, alpha, best_value, search.nodes)

    return result


def h_argmaxes(
    m: int,
    alpha: Alpha,
    *,
    limit: int | None = None,
    allow_large: bool = False,
    settings: Settings | None = None,
) -> Iterator[Tcm]:
    """Yield every extremal TCM on [m] (up to `limit` of them), without symmetry reduction.

    Float weights count as tied within `Settings.float_tie_tolerance`.
    """
    settings = settings or get_settings()
    _check_h_domain(m, alpha, allow_large=allow_large, settings=settings)

    search = _LayeredSearch(m, alpha, None, settings.float_tie_tolerance)
    labels = tuple(range(1, m + 1))
    zeros = (0,) * comb(m, 2)
    target = search.best(m, zeros)[0] if m >= 2 else 0  # noqa: PLR2004

    for count, edges in enumerate(search.ties(labels, zeros, target)):
        if limit is not None and count >= limit:
            return

        yield Tcm.from_mapping(m, edges)


# Local search


class MoveKind(StrEnum):
    """Weight-increasing edits applied by `local_search`."""

    SINGLE = "single"
    PAIRED = "paired"
    CHAIN = "chain"


type Move = tuple[int, int]


class _Climber:
    """Mutable TCM with exact incremental weight bookkeeping."""

    def __init__(self, g: Tcm, alpha: Alpha, tolerance: float) -> None:
        self.m = g.m
        self.alpha = alpha
        self.tolerance = tolerance
        self.powers = tuple(alpha**k for k in range(g.m + 1))

        index = pair_index(g.m)
        self.options = tuple(
            tuple(index[pair] for pair in _triple_pairs(triple)) for triple in triples(g.m)
        )
        self.chosen = [
            _triple_pairs(triple).index(edge) for triple, edge in g.items()
        ]
        self.multiplicities = list(g.multiplicities)
        self.weight: Weight = weight(g, alpha)

        self.triples_of_pair: list[list[int]] = [[] for _ in pairs(g.m)]
        for t, slots in enumerate(self.options):
            for slot in slots:
                self.triples_of_pair[slot].append(t)

    def positive(self, delta: Weight) -> bool:
        return delta > 0 if is_exact(delta) else delta > self.tolerance

    def zero(self, delta: Weight) -> bool:
        return delta == 0 if is_exact(delta) else abs(delta) <= self.tolerance

    def delta(self, changes: Mapping[int, int]) -> Weight:
        """Return the weight change of adding `changes[slot]` to each pair's multiplicity."""
        return sum(
            (
                self.powers[self.multiplicities[slot] + step] - self.powers[self.multiplicities[slot]]
                for slot, step in changes.items()
                if step
            ),
            start=0,
        )

    def gain(self, t: int, option: int) -> Weight:
        """Return (α − 1)(α^{m_f} − α^{m_e − 1}) for moving triple t from edge e to f."""
        current = self.options[t][self.chosen[t]]
        target = self.options[t][option]
        return (self.alpha - 1) * (
            self.powers[self.multiplicities[target]]
            - self.powers[self.multiplicities[current] - 1]
        )

    def apply(self, t: int, option: int) -> None:
        self.weight += self.gain(t, option)
        self.multiplicities[self.options[t][self.chosen[t]]] -= 1
        self.multiplicities[self.options[t][option]] += 1
        self.chosen[t] = option

    def improving_single(self, order: Iterable[int]) -> Move | None:
        for t in order:
            gains = [
                (self.gain(t, option), option) for option in range(3) if option != self.chosen[t]
            ]
            best_gain, option = max(gains, key=lambda item: item[0])
            if self.positive(best_gain):
                return t, option

        return None

    def improving_pair(self) -> list[Move] | None:
        """Move a pair xy chosen in xyz and xyw to xz and xw when that gains weight."""
        all_pairs = pairs(self.m)
        index = pair_index(self.m)
        for slot, (x, y) in enumerate(all_pairs):
            if self.multiplicities[slot] < 2:  # noqa: PLR2004
                continue

            holders = [
                t for t in self.triples_of_pair[slot] if self.options[t][self.chosen[t]] == slot
            ]
            for first, second in combinations(holders, 2):
                (z,) = set(triples(self.m)[first]) - {x, y}
                (w,) = set(triples(self.m)[second]) - {x, y}
                for pivot in (x, y):
                    near = index[(min(pivot, z), max(pivot, z))]
                    far = index[(min(pivot, w), max(pivot, w))]
                    if self.positive(self.delta(Counter({slot: -2, near: 1, far: 1}))):
                        return [
                            (first, self.options[first].index(near)),
                            (second, self.options[second].index(far)),
                        ]

        return None

    def touched(self, t: int, previous: int) -> list[int]:
        slots = {self.options[t][previous], self.options[t][self.chosen[t]]}
        return sorted({other for slot in slots for other in self.triples_of_pair[slot]})

    def improving_chain(self, depth: int, scan: Sequence[int] | None = None) -> list[Move] | None:
        """Find weight-neutral moves after which a single move strictly gains weight."""
        if depth == 0:
            return None

        for t in scan if scan is not None else range(len(self.options)):
            previous = self.chosen[t]
            for option in range(3):
                if option == previous or not self.zero(self.gain(t, option)):
                    continue

                self.apply(t, option)
                nearby = self.touched(t, previous)
                found = self.improving_single(nearby)
                tail = [found] if found is not None else self.improving_chain(depth - 1, nearby)
                self.apply(t, previous)

                if tail is not None:
                    return [(t, option), *tail]

        return None

    def to_tcm(self) -> Tcm:
        return Tcm.from_options(self.m, self.chosen)


class LocalSearchResult(BaseModel):
    """The best TCM reached by hill climbing from the given and random starts."""

    model_config = ConfigDict(extra="forbid", frozen=True, arbitrary_types_allowed=True)

    tcm: Tcm
    weight: Weight
    initial_weight: Weight
    moves: dict[MoveKind, int]
    restarts: int
    iterations: int
    local_optimum: bool


def _climb(
    climber: _Climber,
    rng: np.random.Generator,
    iters: int,
    chain_depth: int,
    moves: Counter[MoveKind],
) -> tuple[int, bool]:
    """Apply improving moves until none is left or `iters` run out."""
    for iteration in range(iters):
        if (single := climber.improving_single(rng.permutation(len(climber.options)))) is not None:
            climber.apply(*single)
            moves[MoveKind.SINGLE] += 1
        elif (paired := climber.improving_pair()) is not None:
            for move in paired:
                climber.apply(*move)
            moves[MoveKind.PAIRED] += 1
        elif chain_depth and (chain := climber.improving_chain(chain_depth)) is not None:
            for move in chain:
                climber.apply(*move)
            moves[MoveKind.CHAIN] += 1
        else:
            return iteration, True

    return iters, False


def local_search(  # noqa: PLR0913
    g: Tcm,
    alpha: Alpha,
    *,
    seed: int = 0,
    iters: int = 10_000,
    restarts: int = 0,
    starts: Iterable[Tcm] = (),
    chain_depth: int = 1,
    settings: Settings | None = None,
) -> LocalSearchResult:
    """Hill-climb from `g`, from any extra `starts`, and from `restarts` random TCMs.

    Moves are accepted only when they strictly increase the weight: reassigning one triple,
    moving a pair xy chosen in xyz and xyw to xz and xw, or up to `chain_depth` weight-neutral
    reassignments followed by an improving one.

    Args:
        g (Tcm): the first start; the result never weighs less
        alpha (Alpha): base, at least 1
        seed (int): seed for the scan orders and random starts
        iters (int): move budget per start
        restarts (int): number of random starts
        starts (Iterable[Tcm]): further starts, such as a recursive construction
        chain_depth (int): longest run of neutral moves tried before an improving one
        settings (Settings, optional): float tie tolerance

    Returns:
        LocalSearchResult: the heaviest TCM reached and the moves applied
    """
    settings = settings or get_settings()
    if alpha < 1:
        raise DomainError(f"Local search is defined for α ≥ 1, got {alpha}")

    seeds = np.random.SeedSequence(seed).spawn(restarts + 1)
    candidates = [g, *starts]
    candidates.extend(random_tcm(g.m, np.random.default_rng(child)) for child in seeds[1:])
    rng = np.random.default_rng(seeds[0])

    moves: Counter[MoveKind] = Counter()
    best: _Climber | None = None
    best_optimum = False
    iterations = 0
    for start in candidates:
        if start.m != g.m:
            raise ValueError(f"Start {start} is not on {g.m} vertices")

        climber = _Climber(start, alpha, settings.float_tie_tolerance)
        used, optimum = _climb(climber, rng, iters, chain_depth, moves)
        iterations += used
        if best is None or climber.weight > best.weight:
            best, best_optimum = climber, optimum

    assert best is not None  # noqa: S101

    LOGGER.debug(
        "local_search on m=%s: %s -> %s with moves %s",
        g.m,
        weight(g, alpha),
        best.weight,
        dict(moves),
    )

    return LocalSearchResult(
        tcm=best.to_tcm(),
        weight=best.weight,
        initial_weight=weight(g, alpha),
        moves={kind: moves[kind] for kind in MoveKind},
        restarts=restarts,
        iterations=iterations,
        local_optimum=best_optimum,
    )


def has_improving_reassignment(g: Tcm, alpha: Alpha) -> bool:
    """Return whether changing one triple's edge strictly increases w(𝒢, α)."""
    climber = _Climber(g, alpha, get_settings().float_tie_tolerance)
    return climber.improving_single(range(len(climber.options))) is not None


# Structure


class ClosedSetPartition(BaseModel):
    """The maximal closed sets of a TCM, which partition [m]."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    m: int
    sets: tuple[tuple[int, ...], ...]

    @model_validator(mode="after")
    def _validate_partition(self) -> Self:
        covered = sorted(vertex for part in self.sets for vertex in part)
        if covered != list(range(1, self.m + 1)):
            raise ValueError(f"{self.sets} does not partition [{self.m}]")

        return self

    @computed_field  # type: ignore[prop-decorator]
    @property
    def sizes(self) -> tuple[int, ...]:
        """Return the size of each set."""
        return tuple(len(part) for part in self.sets)


def is_closed(g: Tcm, s: Iterable[int]) -> bool:
    """Return whether xy is chosen in xyz for all distinct x, y in S and every z outside S."""
    members = set(s)
    outside = [z for z in range(1, g.m + 1) if z not in members]
    return all(
        g.edge((x, y, z)) == (x, y) for x, y in combinations(sorted(members), 2) for z in outside
    )


def closure_of(g: Tcm, s: Iterable[int]) -> tuple[int, ...]:
    """Return the smallest closed set containing S."""
    members = set(s)
    changed = True
    while changed:
        changed = False
        for z in range(1, g.m + 1):
            if z not in members and any(
                g.edge((x, y, z)) != (x, y) for x, y in combinations(sorted(members), 2)
            ):
                members.add(z)
                changed = True

    return tuple(sorted(members))


def closed_sets(g: Tcm) -> ClosedSetPartition:
    """Return the maximal closed sets of 𝒢.

    Closed sets that meet are nested, so the largest proper closed set containing a vertex v
    is the largest proper closure of a pair through v, or {v} when every such closure is [m].
    """
    everything = tuple(range(1, g.m + 1))
    proper = [
        closure
        for pair in pairs(g.m)
        if (closure := closure_of(g, pair)) != everything
    ]

    sets: set[tuple[int, ...]] = set()
    for vertex in everything:
        containing = [closure for closure in proper if vertex in closure]
        sets.add(max(containing, key=len) if containing else (vertex,))

    result = ClosedSetPartition(m=g.m, sets=tuple(sorted(sets)))

    for part in result.sets:
        if not is_closed(g, part):
            raise RuntimeError(f"{part} was reported as closed in {g} but is not")

    return result


def degree_profile(g: Tcm, x: int) -> tuple[int, ...]:
    """Return (d_0(x), ..., d_{m−2}(x)): how many pairs through x have each multiplicity."""
    profile = [0] * max(g.m - 1, 0)
    for y in range(1, g.m + 1):
        if y != x:
            profile[g.multiplicity(x, y)] += 1

    return tuple(profile)


def satisfies_degree_bound(g: Tcm) -> bool:
    """Return whether Σ_{j ≥ t} d_j(x) ≤ m − 1 − t for every vertex x and every t ≥ 1.

    Every TCM without a strictly improving single reassignment satisfies this.
    """
    for x in range(1, g.m + 1):
        profile = degree_profile(g, x)
        for t in range(1, len(profile)):
            if sum(profile[t:]) > g.m - 1 - t:
                return False

    return True


def satisfies_unique_choice(g: Tcm) -> bool:
    """Return whether every triple chooses its pair of strictly largest multiplicity, if any."""
    for triple, edge in g.items():
        ranked = sorted(_triple_pairs(triple), key=lambda pair: -g.multiplicity(*pair))
        top, runner_up = ranked[0], ranked[1]
        if g.multiplicity(*top) > g.multiplicity(*runner_up) and edge != top:
            return False

    return True
