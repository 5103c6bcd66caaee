"""H₂(m, α) by splits, the 2-recursive construction 𝒢(m), λ(α) and the closed-form bounds."""

from __future__ import annotations

from enum import StrEnum
from fractions import Fraction
from itertools import combinations
from logging import getLogger
from math import exp, floor, log
from typing import TYPE_CHECKING, Final

from pydantic import BaseModel, ConfigDict, Field, computed_field

from forbcfg.choice_engine import (
    ChoiceMode,
    choice_from_tcm,
    forb_from_choice,
    forb_via_choices,
)
from forbcfg.common import Alpha, SearchStatus, Triple, alpha_for_r, is_exact, triple_count
from forbcfg.config import Settings, get_settings
from forbcfg.exceptions import DivergentParameterError, DomainError
from forbcfg.tcm_opt import Tcm, Weight, h_exact, normalized, weight

if TYPE_CHECKING:
    from collections.abc import Mapping

LOGGER = getLogger(__name__)

UPPER_COEFFICIENT: Final = Fraction(83, 192)
CLOSED_SET_CEILING: Final = Fraction(5, 12)
EXACT_H_VALUES: Final[dict[int, int]] = {1: 0, 2: 1, 3: 4, 4: 12, 5: 30, 6: 73}
"""H(m, 2) for m ≤ 6, as `h_exact` reproduces them."""

LAMBDA_MAX_TERMS: Final[int] = 64


def _same(left: Weight, right: Weight, tolerance: float) -> bool:
    if is_exact(left) and is_exact(right):
        return left == right

    return abs(float(left) - float(right)) <= tolerance * max(1.0, abs(float(right)))


def _check_alpha(alpha: Alpha) -> None:
    if alpha < 1:
        raise DomainError(f"H₂(m, α) is only tabulated for α ≥ 1, got {alpha}")


# H₂ table


class H2Row(BaseModel):
    """One row of the H₂ table."""

    model_config = ConfigDict(extra="forbid", frozen=True, arbitrary_types_allowed=True)

    m: int
    value: Weight
    splits: tuple[tuple[int, int], ...]
    predicted: tuple[int, int] | None = None

    @computed_field  # type: ignore[prop-decorator]
    @property
    def split(self) -> tuple[int, int] | None:
        """Return the tying split with the smallest first part."""
        return self.splits[0] if self.splits else None

    @computed_field  # type: ignore[prop-decorator]
    @property
    def agrees(self) -> bool | None:
        """Return whether the predicted split attains the maximum."""
        if self.predicted is None:
            return None

        return tuple(sorted(self.predicted)) in self.splits


class H2Table(BaseModel):
    """H₂(m, α) for m = 1, ..., m_max with every tying split a ≤ b."""

    model_config = ConfigDict(extra="forbid", frozen=True, arbitrary_types_allowed=True)

    alpha: Alpha
    rows: tuple[H2Row, ...]

    @property
    def m_max(self) -> int:
        """Return the largest tabulated m."""
        return len(self.rows)

    def row(self, m: int) -> H2Row:
        """Return the row for m."""
        if not 1 <= m <= self.m_max:
            raise KeyError(f"m={m} is outside the table (1..{self.m_max})")

        return self.rows[m - 1]

    def value(self, m: int) -> Weight:
        """Return H₂(m, α)."""
        return self.row(m).value

    def normalized(self, m: int) -> Weight:
        """Return h₂(m, α) = 2H₂(m, α)/(mα^m)."""
        return normalized(self.value(m), m, self.alpha)


def h2_table(m_max: int, alpha: Alpha, *, settings: Settings | None = None) -> H2Table:
    """Tabulate H₂(m, α) = max_{1 ≤ a ≤ m/2} H₂(a)α^{m−a} + H₂(m−a)α^a + a(m − a).

    Integer and Fraction α keep the table exact; for float α, splits within
    `Settings.float_tie_tolerance` (relative) of the maximum are all reported.
    """
    settings = settings or get_settings()
    _check_alpha(alpha)
    if m_max < 1:
        raise DomainError(f"The H₂ table needs m_max ≥ 1, got {m_max}")

    values: list[Weight] = [0, 0, 1]
    rows = [H2Row(m=1, value=0, splits=()), H2Row(m=2, value=1, splits=((1, 1),))]
    for m in range(3, m_max + 1):
        candidates = {
            a: values[a] * alpha ** (m - a) + values[m - a] * alpha**a + a * (m - a)
            for a in range(1, m // 2 + 1)
        }
        best = max(candidates.values())
        splits = tuple(
            (a, m - a)
            for a, value in candidates.items()
            if _same(value, best, settings.float_tie_tolerance)
        )
        values.append(best)
        rows.append(
            H2Row(
                m=m,
                value=best,
                splits=splits,
                predicted=_predicted_parts(m, alpha) if alpha >= 2 else None,  # noqa: PLR2004
            ),
        )

    return H2Table(alpha=alpha, rows=tuple(rows[:m_max]))


# Splits and the construction


def power_of_two_exponent(m: int) -> int:
    """Return the k with 2^k + 2^{k−1} ≤ m < 2^k + 2^{k+1}, for m ≥ 3."""
    if m < 3:  # noqa: PLR2004
        raise DomainError(f"The split exponent is defined for m ≥ 3, got {m}")

    k = 1
    while not 2**k + 2 ** (k - 1) <= m < 2**k + 2 ** (k + 1):
        k += 1

    return k


class PredictedSplit(BaseModel):
    """The split m = |V₁| + |V₂| expected to be optimal."""

    model_config = ConfigDict(extra="forbid", frozen=True, arbitrary_types_allowed=True)

    m: int
    alpha: Alpha
    k: int | None
    parts: tuple[int, int]
    confirmed: bool | None = None
    note: str | None = None


def _below_silver_ratio(alpha: Alpha) -> bool:
    """Return whether α < 1 + √2, exactly for rational α."""
    return (alpha - 1) ** 2 < 2  # noqa: PLR2004


def _predicted_parts(m: int, alpha: Alpha) -> tuple[int, int]:
    if m == 6:  # noqa: PLR2004
        return (3, 3) if _below_silver_ratio(alpha) else (4, 2)

    k = power_of_two_exponent(m)
    return 2**k, m - 2**k


def predicted_split(m: int, alpha: Alpha = 2) -> PredictedSplit:
    """Return (2^k, m − 2^k) with 2^k + 2^{k−1} ≤ m < 2^k + 2^{k+1}.

    At m = 6 that rule gives 4 + 2, which loses to 3 + 3 while α < 1 + √2: the difference
    between the two splits is (α² − 2α − 1)(α − 1)². The six-vertex split is therefore read as
    the size of V₁ (3 below 1 + √2, 4 from there on) and checked against the H₂ table.
    """
    _check_alpha(alpha)
    parts = _predicted_parts(m, alpha)
    if m != 6:  # noqa: PLR2004
        return PredictedSplit(m=m, alpha=alpha, k=power_of_two_exponent(m), parts=parts)

    table = h2_table(6, alpha)
    confirmed = tuple(sorted(parts)) in table.row(6).splits
    if not confirmed:
        LOGGER.error("Split %s is not optimal for H₂(6, %s): %s", parts, alpha, table.row(6))

    return PredictedSplit(
        m=6,
        alpha=alpha,
        k=None,
        parts=parts,
        confirmed=confirmed,
        note=(
            "six vertices: the first part has 3 vertices for α < 1 + √2 and 4 otherwise; "
            "the power-of-two rule would give 4 + 2 for every α"
        ),
    )


class SplitRule(StrEnum):
    """How `build_g` splits a vertex set."""

    OPTIMAL = "optimal"
    POWER_OF_TWO = "power_of_two"

    def parts(self, m: int, alpha: Alpha) -> tuple[int, int]:
        """Return (|V₁|, |V₂|) for m ≥ 2 vertices."""
        if m == 2:  # noqa: PLR2004
            return 1, 1

        if self is SplitRule.OPTIMAL:
            return _predicted_parts(m, alpha)

        k = power_of_two_exponent(m)
        return 2**k, m - 2**k


class SplitTree(BaseModel):
    """The recursion certificate of a 2-recursive TCM: V = V₁ ∪ V₂ at every internal node."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    vertices: tuple[int, ...]
    children: tuple[SplitTree, SplitTree] | None = None

    @property
    def size(self) -> int:
        """Return |V|."""
        return len(self.vertices)

    def leaves(self) -> tuple[int, ...]:
        """Return the vertices in left-to-right leaf order."""
        if self.children is None:
            return self.vertices

        return self.children[0].leaves() + self.children[1].leaves()

    def describe(self) -> str:
        """Render the split sizes, e.g. `6=(3=(2+1))+(3=(2+1))`."""
        if self.children is None or self.size < 3:  # noqa: PLR2004
            return str(self.size)

        left, right = self.children
        return f"{self.size}=({left.describe()})+({right.describe()})"


class Construction(BaseModel):
    """A 2-recursive TCM with its split tree."""

    model_config = ConfigDict(extra="forbid", frozen=True, arbitrary_types_allowed=True)

    tcm: Tcm
    tree: SplitTree
    rule: SplitRule
    alpha: Alpha


def _assemble(
    vertices: tuple[int, ...],
    rule: SplitRule,
    alpha: Alpha,
    edges: dict[Triple, tuple[int, int]],
) -> SplitTree:
    if len(vertices) < 2:  # noqa: PLR2004
        return SplitTree(vertices=vertices)

    first, _ = rule.parts(len(vertices), alpha)
    left, right = vertices[:first], vertices[first:]

    for inside, outside in ((left, right), (right, left)):
        for u, v in combinations(inside, 2):
            for z in outside:
                edges[tuple(sorted((u, v, z)))] = (u, v)  # type: ignore[index]

    return SplitTree(
        vertices=vertices,
        children=(_assemble(left, rule, alpha, edges), _assemble(right, rule, alpha, edges)),
    )


def build_g(m: int, rule: SplitRule = SplitRule.OPTIMAL, *, alpha: Alpha = 2) -> Construction:
    """Build the 2-recursive TCM 𝒢(m).

    [m] splits into an initial segment V₁ and the rest V₂, each built recursively; a triple
    with two vertices in one part chooses the edge inside that part. The vertex order 1..m is
    the leaf order of the split tree, so `choice_from_tcm` orients the result uniformly.

    Args:
        m (int): vertex count, at least 1
        rule (SplitRule): `OPTIMAL` follows `predicted_split`; `POWER_OF_TWO` splits off
            2^k at every size, six included
        alpha (Alpha): only decides the six-vertex split under `OPTIMAL`

    Returns:
        Construction: the TCM and its split tree
    """
    if m < 1:
        raise DomainError(f"The construction needs m ≥ 1, got {m}")

    edges: dict[Triple, tuple[int, int]] = {}
    tree = _assemble(tuple(range(1, m + 1)), rule, alpha, edges)

    if len(edges) != triple_count(m):
        raise RuntimeError(f"Construction on {m} vertices decided {len(edges)} triples")

    return Construction(tcm=Tcm.from_mapping(m, edges), tree=tree, rule=rule, alpha=alpha)


def h2_bar(m: int, alpha: Alpha) -> Weight:
    """Return H̄₂(m, α), the weight of the power-of-two construction, by its recurrence."""
    _check_alpha(alpha)
    values: dict[int, Weight] = {1: 0, 2: 1}
    for n in range(3, m + 1):
        k = power_of_two_exponent(n)
        big, small = 2**k, n - 2**k
        values[n] = values[big] * alpha**small + values[small] * alpha**big + big * small

    return values[m] if m >= 1 else 0


# g, λ and ε


def _check_convergent(alpha: Alpha) -> None:
    if alpha <= 1:
        raise DivergentParameterError(f"g(k, α) and λ(α) need α > 1, got {alpha}")


def g_partial(k: int, alpha: Alpha) -> Weight:
    """Return g(k, α) = Σ_{j=1}^{k} 2^{j−1}/α^{2^j}, exact for rational α."""
    _check_convergent(alpha)
    if is_exact(alpha):
        base = Fraction(alpha)
        return sum(
            (Fraction(2 ** (j - 1)) / base ** 2**j for j in range(1, k + 1)),
            start=Fraction(0),
        )

    return sum(2 ** (j - 1) / float(alpha) ** 2**j for j in range(1, k + 1))


class LambdaEstimate(BaseModel):
    """A truncation of λ(α) with a certified bound on the omitted tail."""

    model_config = ConfigDict(extra="forbid", frozen=True, arbitrary_types_allowed=True)

    alpha: Alpha
    value: float
    terms: int
    tail_bound: float
    eps: float


def _term(j: int, log_alpha: float) -> float:
    """Return 2^{j−1}/α^{2^j} without overflowing."""
    exponent = (j - 1) * log(2) - 2**j * log_alpha
    return exp(exponent) if exponent > -745 else 0.0  # noqa: PLR2004


def lambda_estimate(alpha: Alpha, eps: float = 1e-9) -> LambdaEstimate:
    """Sum λ(α) = Σ_{j≥1} 2^{j−1}/α^{2^j} until the tail is certified below `eps`.

    After k terms the ratio of consecutive omitted terms is at most q = 2/α^{2^{k+1}}, so once
    q < 1 the tail is at most t_{k+1}/(1 − q).
    """
    _check_convergent(alpha)
    if eps <= 0:
        raise DomainError(f"eps must be positive, got {eps}")

    log_alpha = log(float(alpha))
    total = 0.0
    for k in range(1, LAMBDA_MAX_TERMS + 1):
        total += _term(k, log_alpha)
        ratio = exp(log(2) - min(2 ** (k + 1) * log_alpha, 700.0))
        if ratio < 1 and (tail := _term(k + 1, log_alpha) / (1 - ratio)) < eps:
            return LambdaEstimate(alpha=alpha, value=total, terms=k, tail_bound=tail, eps=eps)

    raise DivergentParameterError(
        f"λ({alpha}) did not reach a tail below {eps} within {LAMBDA_MAX_TERMS} terms",
    )


def epsilon(m: int) -> Fraction:
    """Return ε(m): 0 for m ≤ 6, else Σ_{j=7}^{m} 2^{−j}."""
    return sum((Fraction(1, 2**j) for j in range(7, m + 1)), start=Fraction(0))


# Upper-bound recursion


class UpperRow(BaseModel):
    """A certified upper bound on h(m) = 2H(m, 2)/(m·2^m)."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    m: int
    bound: Fraction
    exact: bool
    slack: Fraction

    @computed_field  # type: ignore[prop-decorator]
    @property
    def within_ceiling(self) -> bool:
        """Return whether bound + ⅔·2^{−m} ≤ 5/12 + ε(m)."""
        return self.slack <= CLOSED_SET_CEILING + epsilon(self.m)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def below_coefficient(self) -> bool:
        """Return whether bound < 83/192."""
        return self.bound < UPPER_COEFFICIENT


def h_upper_table(m_max: int, h_values: Mapping[int, int] | None = None) -> tuple[UpperRow, ...]:
    """Bound h(m) for m ≤ m_max from exact small values and the closed-set decomposition.

    Some extremal TCM splits into maximal closed sets of sizes a_i ≥ 2, and h(m) is at most
    the size-weighted average of h(a_i) + ⅔·2^{−a_i}, hence at most the largest such term.

    Args:
        m_max (int): last m to bound
        h_values (Mapping[int, int], optional): exact H(m, 2) for 1 ≤ m ≤ 6; defaults to
            `EXACT_H_VALUES`

    Returns:
        tuple[UpperRow, ...]: one row per m from 1 to m_max
    """
    h_values = h_values if h_values is not None else EXACT_H_VALUES
    bounds: dict[int, Fraction] = {}
    rows = []
    for m in range(1, m_max + 1):
        if m in h_values and m <= 6:  # noqa: PLR2004
            bounds[m] = Fraction(2 * h_values[m], m * 2**m)
            exact = True
        else:
            bounds[m] = max(bounds[a] + Fraction(2, 3 * 2**a) for a in range(2, m - 1))
            exact = False

        rows.append(
            UpperRow(
                m=m,
                bound=bounds[m],
                exact=exact,
                slack=bounds[m] + Fraction(2, 3 * 2**m),
            ),
        )

    return tuple(rows)


class FleqgRow(BaseModel):
    """h₂(m, 2) against g(⌊log₂ m⌋, 2)."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    m: int
    h2: Fraction
    g: Fraction
    expected_holds: bool
    expected_equality: bool

    @computed_field  # type: ignore[prop-decorator]
    @property
    def holds(self) -> bool:
        """Return whether h₂ ≤ g."""
        return self.h2 <= self.g

    @computed_field  # type: ignore[prop-decorator]
    @property
    def matches(self) -> bool:
        """Return whether the inequality and equality cases are as expected."""
        return self.holds == self.expected_holds and (
            not self.expected_holds or (self.h2 == self.g) == self.expected_equality
        )


FLEQG_EXCEPTIONS: Final = frozenset({3, 6, 7})


def fleqg_check(m_max: int) -> tuple[FleqgRow, ...]:
    """Compare h₂(m, 2) with g(⌊log₂ m⌋, 2) for 1 ≤ m ≤ m_max.

    The inequality fails exactly at m = 3, 6, 7 and is an equality exactly at m = 5 and at
    powers of 2.
    """
    table = h2_table(m_max, 2)
    rows = []
    for m in range(1, m_max + 1):
        k = m.bit_length() - 1
        rows.append(
            FleqgRow(
                m=m,
                h2=Fraction(table.normalized(m)),
                g=Fraction(g_partial(k, 2)),
                expected_holds=m not in FLEQG_EXCEPTIONS,
                expected_equality=m == 5 or m & (m - 1) == 0,  # noqa: PLR2004
            ),
        )

    return tuple(rows)


# Closed-form bounds


def general_upper_coefficient(alpha: Alpha) -> Weight:
    """Return (α⁶ + α⁴ + α + 1)/(α⁶(α² − 1)), the H(m, α) coefficient for α ≥ 2."""
    if alpha < 2:  # noqa: PLR2004
        raise DomainError(f"The general upper bound on H(m, α) is stated for α ≥ 2, got {alpha}")

    if is_exact(alpha):
        a = Fraction(alpha)
        return (a**6 + a**4 + a + 1) / (a**6 * (a**2 - 1))

    return (alpha**6 + alpha**4 + alpha + 1) / (alpha**6 * (alpha**2 - 1))


class BoundReport(BaseModel):
    """Every closed-form bound at (m, r), with α = (r − 1)/(r − 2) unless overridden."""

    model_config = ConfigDict(extra="forbid", frozen=True, arbitrary_types_allowed=True)

    m: int
    r: int
    alpha: Alpha
    epsilon: Fraction
    trivial_lower: int
    trivial_upper: int
    h2: Weight
    forb_lower: Weight
    forb_upper: Fraction
    h_upper: Fraction
    general_upper_coefficient: Weight | None
    h_upper_alpha: Weight | None
    lambda_value: float
    forb_lower_asymptotic: float
    slack: float = Field(ge=0)

    def inconsistencies(self) -> list[str]:
        """Return every lower/upper pair that is out of order, plus coefficient mismatches."""
        problems = []
        if not self.trivial_lower <= self.forb_lower <= min(self.forb_upper, self.trivial_upper):
            problems.append(
                "expected trivial_lower ≤ forb_lower ≤ min(forb_upper, trivial_upper), got "
                f"{self.trivial_lower}, {self.forb_lower}, {self.forb_upper}, {self.trivial_upper}",
            )

        if self.alpha == 2 and self.general_upper_coefficient != UPPER_COEFFICIENT:  # noqa: PLR2004
            problems.append(
                f"general coefficient at α = 2 is {self.general_upper_coefficient}, not 83/192",
            )

        if self.h_upper_alpha is not None and self.h2 > self.h_upper_alpha:
            problems.append(f"H₂ = {self.h2} exceeds the upper bound {self.h_upper_alpha}")

        return problems


def bounds(m: int, r: int, *, alpha: Alpha | None = None, slack: float = 0.0) -> BoundReport:
    """Evaluate the closed-form bounds on forb(m, r, M), H(m, 2) and H(m, α).

    Args:
        m (int): number of rows, at least 1
        r (int): alphabet size, at least 3
        alpha (Alpha, optional): overrides α = (r − 1)/(r − 2) for the H(m, α) and λ terms
        slack (float): the ε of the asymptotic lower bound, which holds for large m only

    Returns:
        BoundReport: the evaluated bounds
    """
    if r < 3:  # noqa: PLR2004
        raise DomainError(f"The bounds on forb(m, r, M) are stated for r ≥ 3, got r={r}")

    if m < 1:
        raise DomainError(f"The bounds need m ≥ 1, got {m}")

    base = alpha if alpha is not None else alpha_for_r(r)
    core = m * (r - 1) ** (m - 1)
    full = (r - 1) ** m
    h2 = h2_table(m, base).value(m)
    lam = lambda_estimate(base).value
    coefficient = general_upper_coefficient(base) if base >= 2 else None  # noqa: PLR2004

    return BoundReport(
        m=m,
        r=r,
        alpha=base,
        epsilon=epsilon(m),
        trivial_lower=core + full,
        trivial_upper=floor(Fraction(3, 2) * core) + full,
        h2=h2,
        forb_lower=full + core + h2 * Fraction(r - 2) ** (m - 2)
        if is_exact(h2)
        else full + core + float(h2) * (r - 2) ** (m - 2),
        forb_upper=(1 + UPPER_COEFFICIENT) * core + full,
        h_upper=UPPER_COEFFICIENT * m * 2 ** (m - 1),
        general_upper_coefficient=coefficient,
        h_upper_alpha=coefficient * m * base**m / 2
        if coefficient is not None and m >= 3  # noqa: PLR2004
        else None,
        lambda_value=lam,
        forb_lower_asymptotic=(1 + (r - 1) / (2 * (r - 2) ** 2) * lam - slack) * core + full,
        slack=slack,
    )


# Sandwich


class SandwichReport(BaseModel):
    """H₂·(r − 2)^{m−2} ≤ forb − (r − 1)^m − m(r − 1)^{m−1} ≤ H·(r − 2)^{m−2} at one (m, r)."""

    model_config = ConfigDict(extra="forbid", frozen=True, arbitrary_types_allowed=True)

    m: int
    r: int
    alpha: Alpha
    forb: int
    forb_status: SearchStatus
    forb_source: str
    excess: int
    lower: Weight
    upper: Weight | None

    @computed_field  # type: ignore[prop-decorator]
    @property
    def one_sided(self) -> bool:
        """Return whether only the lower inequality could be checked."""
        return self.upper is None or self.forb_status is not SearchStatus.EXACT

    @computed_field  # type: ignore[prop-decorator]
    @property
    def holds(self) -> bool:
        """Return whether every checkable inequality holds."""
        if self.one_sided:
            return self.lower <= self.excess

        return self.lower <= self.excess <= self.upper  # type: ignore[operator]


def sandwich_check(m: int, r: int, *, settings: Settings | None = None) -> SandwichReport:
    """Compute H₂, H and forb at (m, r) and check that forb's excess lies between them.

    forb comes from the maximum over all choices when that family fits under
    `Settings.max_choices`; otherwise the choice realising the 2-recursive construction gives
    a lower bound and only the left inequality is checked.
    """
    settings = settings or get_settings()
    if r < 3:  # noqa: PLR2004
        raise DomainError(f"The sandwich is stated for r ≥ 3, got r={r}")

    alpha = alpha_for_r(r)
    scale = Fraction(r - 2) ** (m - 2)
    h2 = h2_table(max(m, 1), alpha, settings=settings).value(m) if m >= 1 else 0

    upper: Weight | None = None
    if 1 <= m <= settings.h_exact_max_m:
        upper = h_exact(m, alpha, settings=settings).value * scale

    if 8 ** triple_count(m) <= settings.max_choices:
        search = forb_via_choices(m, r, ChoiceMode.ALL, settings=settings)
        forb, status, source = search.value, search.status, "choices"
    else:
        construction = build_g(m, alpha=alpha if alpha >= 2 else 2)  # noqa: PLR2004
        witness = choice_from_tcm(construction.tcm)
        forb = forb_from_choice(m, r, witness, settings=settings)
        status, source = SearchStatus.LOWER_BOUND, "construction"
        LOGGER.info("forb(%s, %s, M) ≥ %s from the recursive construction", m, r, forb)

    report = SandwichReport(
        m=m,
        r=r,
        alpha=alpha,
        forb=forb,
        forb_status=status,
        forb_source=source,
        excess=forb - (r - 1) ** m - m * (r - 1) ** (m - 1),
        lower=h2 * scale,
        upper=upper,
    )

    if not report.holds:
        LOGGER.error("Sandwich fails at m=%s, r=%s: %s", m, r, report)

    return report


def h_table_check(
    m_max: int,
    alpha: Alpha = 2,
    *,
    settings: Settings | None = None,
) -> dict[int, tuple[Weight, Weight]]:
    """Return {m: (H(m, α), H₂(m, α))} for the exactly searchable m."""
    table = h2_table(m_max, alpha, settings=settings)
    return {
        m: (h_exact(m, alpha, settings=settings).value, table.value(m))
        for m in range(1, m_max + 1)
    }


def construction_weight(m: int, alpha: Alpha, rule: SplitRule = SplitRule.OPTIMAL) -> Weight:
    """Return w(𝒢(m), α)."""
    return weight(build_g(m, rule, alpha=alpha).tcm, alpha)

