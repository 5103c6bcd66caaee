"""Named verification suites: each suite is a list of checks producing expected/actual rows."""

from __future__ import annotations

from collections.abc import Callable
from fractions import Fraction
from itertools import combinations, product
from logging import getLogger
from typing import Final

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from forbcfg.choice_engine import (
    GOOD_SELECTORS,
    Choice,
    ChoiceMode,
    block_bound,
    c_scc,
    count_valid_columns,
    forb_via_choices,
    nonedge_count,
    random_choice,
    reduce_bad_choice,
)
from forbcfg.common import triple_count
from forbcfg.config import Settings, get_settings
from forbcfg.matrix_core import (
    ConfigPattern,
    RMatrix,
    contains_config,
    forb_exact,
    pattern_by_name,
    sauer_bound,
)
from forbcfg.recurrence import (
    EXACT_H_VALUES,
    UPPER_COEFFICIENT,
    SplitRule,
    build_g,
    fleqg_check,
    g_partial,
    general_upper_coefficient,
    h2_bar,
    h2_table,
    h_table_check,
    h_upper_table,
    lambda_estimate,
    sandwich_check,
)
from forbcfg.reports import H2_TABLE_EXPECTED, H_TABLE_EXPECTED, Table
from forbcfg.tcm_opt import (
    closed_sets,
    h_argmaxes,
    is_closed,
    local_search,
    random_tcm,
    satisfies_degree_bound,
    satisfies_unique_choice,
    weight,
)

LOGGER = getLogger(__name__)

LAMBDA_2: Final[float] = 0.390747
LAMBDA_TOLERANCE: Final[float] = 1e-6
ARGMAX_SAMPLE: Final[int] = 200
CONVERGENCE_TOLERANCE: Final[float] = 0.01


class CheckResult(BaseModel):
    """One verified fact."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    suite: str
    check: str
    case: str
    expected: str
    actual: str
    match: bool


class SuiteContext(BaseModel):
    """Shared inputs for a suite run."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    seed: int = 0
    samples: int | None = Field(default=None, ge=1)
    settings: Settings = Field(default_factory=get_settings)

    def sample_count(self, default: int) -> int:
        """Return `--samples` when given, else the check's own default."""
        return self.samples if self.samples is not None else default

    def rng(self, salt: int) -> np.random.Generator:
        """Return a generator derived from the run seed and a per-check salt."""
        return np.random.default_rng([self.seed, salt])


class Check(BaseModel):
    """A named check: a function returning (case, expected, actual) triples."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str
    run: Callable[[SuiteContext], list[tuple[str, object, object]]]


def _case(**params: object) -> str:
    return " ".join(f"{key}={value}" for key, value in params.items())


# sauer / oracle


def _sauer(_: SuiteContext) -> list[tuple[str, object, object]]:
    return [
        (
            _case(m=m, k=k),
            sauer_bound(m, k),
            forb_exact(m, 2, ConfigPattern.complete(k)).value,
        )
        for m in range(1, 5)
        for k in range(1, 4)
    ]


def _oracle(ctx: SuiteContext) -> list[tuple[str, object, object]]:
    rows: list[tuple[str, object, object]] = [
        (_case(m=2, r=3), 9, forb_exact(2, 3, pattern_by_name("M"), settings=ctx.settings).value),
    ]
    for m, r in ((3, 3), (3, 4)):
        exact = forb_exact(m, r, pattern_by_name("M"), settings=ctx.settings).value
        choices = forb_via_choices(m, r, settings=ctx.settings).value
        rows.append((_case(m=m, r=r, source="choices"), exact, choices))

    rows.append((_case(m=3, r=3, source="forb_exact"), 24, rows[1][1]))
    return rows


# H and H₂ tables


def _h_table(ctx: SuiteContext) -> list[tuple[str, object, object]]:
    checked = h_table_check(max(H_TABLE_EXPECTED), 2, settings=ctx.settings)
    rows: list[tuple[str, object, object]] = [
        (_case(m=m, alpha=2), value, checked[m][0]) for m, value in H_TABLE_EXPECTED.items()
    ]
    rows.extend((_case(m=m, alpha=2, against="H2"), h2, h) for m, (h, h2) in checked.items())
    return rows


def _h2_table(ctx: SuiteContext) -> list[tuple[str, object, object]]:
    table = h2_table(8, 2, settings=ctx.settings)
    return [(_case(m=m), value, table.value(m)) for m, value in H2_TABLE_EXPECTED.items()]


def _optimal_split(ctx: SuiteContext) -> list[tuple[str, object, object]]:
    table = h2_table(48, 2, settings=ctx.settings)
    rows: list[tuple[str, object, object]] = [
        (_case(m=row.m, predicted=row.predicted), True, row.agrees) for row in table.rows[2:]
    ]
    rows.append((_case(m=6, argmax="splits"), ((3, 3),), table.row(6).splits))
    return rows


def _sandwich(ctx: SuiteContext) -> list[tuple[str, object, object]]:
    rows: list[tuple[str, object, object]] = []
    for m in (3, 4):
        report = sandwich_check(m, 3, settings=ctx.settings)
        rows.extend(
            (
                (_case(m=m, r=3, side="H"), report.upper, report.excess),
                (_case(m=m, r=3, side="H2"), report.lower, report.excess),
                (_case(m=m, r=3, side="table"), EXACT_H_VALUES[m], report.excess),
            ),
        )

    for m, r in ((2, 3), (3, 4)):
        report = sandwich_check(m, r, settings=ctx.settings)
        rows.append((_case(m=m, r=r, side="holds"), True, report.holds))

    return rows


# Choice counting


def _scc(ctx: SuiteContext) -> list[tuple[str, object, object]]:
    mismatches = 0
    cases = 0
    for selectors in product(GOOD_SELECTORS, repeat=triple_count(4)):
        choice = Choice(m=4, selectors=selectors)
        for size in range(5):
            for x in combinations(range(1, 5), size):
                cases += 1
                mismatches += c_scc(choice, x) != count_valid_columns(choice, x)

    rows: list[tuple[str, object, object]] = [(_case(m=4, cases=cases), 0, mismatches)]

    rng = ctx.rng(6)
    count = ctx.sample_count(10_000)
    for m in (5, 6):
        sampled = 0
        for _ in range(count):
            choice = random_choice(m, rng, good_only=True)
            x = tuple(int(v) + 1 for v in np.flatnonzero(rng.integers(0, 2, m)))
            sampled += c_scc(choice, x) != count_valid_columns(choice, x)

        rows.append((_case(m=m, samples=count), 0, sampled))

    return rows


def _block_bound(ctx: SuiteContext) -> list[tuple[str, object, object]]:
    rng = ctx.rng(7)
    count = ctx.sample_count(100_000)
    rows: list[tuple[str, object, object]] = []
    for m in (4, 5, 6):
        violations = 0
        for _ in range(count):
            choice = random_choice(m, rng)
            x = tuple(int(v) + 1 for v in np.flatnonzero(rng.integers(0, 2, m)))
            violations += count_valid_columns(choice, x) > block_bound(choice, x)

        rows.append((_case(m=m, samples=count), 0, violations))

    return rows


def _reduce(ctx: SuiteContext) -> list[tuple[str, object, object]]:
    every = forb_via_choices(4, 3, ChoiceMode.ALL, settings=ctx.settings)
    good = forb_via_choices(4, 3, ChoiceMode.GOOD_ONLY, settings=ctx.settings)
    rows: list[tuple[str, object, object]] = [
        (_case(m=4, r=3, family="good"), every.value, good.value),
        (_case(m=4, r=3, argmax="good"), True, good.choice.is_good),
    ]

    rng = ctx.rng(8)
    count = ctx.sample_count(2_000)
    for m in (4, 5):
        failures = 0
        for _ in range(count):
            choice = random_choice(m, rng)
            reduced = reduce_bad_choice(choice)
            failures += not reduced.is_good or any(
                nonedge_count(reduced, x) + len(x) + 1 < block_bound(choice, x)
                for size in range(m + 1)
                for x in combinations(range(1, m + 1), size)
            )

        rows.append((_case(m=m, samples=count, check="reduced"), 0, failures))

    return rows


# λ, coefficients and the construction


def _lambda(_: SuiteContext) -> list[tuple[str, object, object]]:
    estimate = lambda_estimate(2, 1e-6)
    rows: list[tuple[str, object, object]] = [
        (_case(alpha=2, eps=1e-6), True, abs(estimate.value - LAMBDA_2) <= LAMBDA_TOLERANCE),
        (_case(alpha=2, coefficient="general"), UPPER_COEFFICIENT, general_upper_coefficient(2)),
    ]
    rows.extend(
        (_case(m=m, bound="83/192"), True, value <= UPPER_COEFFICIENT * m * 2 ** (m - 1))
        for m, value in EXACT_H_VALUES.items()
    )
    return rows


def _construction(_: SuiteContext) -> list[tuple[str, object, object]]:
    table = h2_table(30, 2)
    rows: list[tuple[str, object, object]] = [
        (_case(m=m), table.value(m), weight(build_g(m).tcm, 2)) for m in range(1, 31)
    ]
    rows.extend(
        (
            _case(m=m, rule="power_of_two"),
            h2_bar(m, 2),
            weight(build_g(m, SplitRule.POWER_OF_TWO).tcm, 2),
        )
        for m in range(1, 31)
    )
    rows.append((_case(m=6, rule="power_of_two"), 72, h2_bar(6, 2)))
    return rows


# Properties


def _random_matrix(rng: np.random.Generator, rows: int, columns: int, r: int) -> RMatrix:
    return RMatrix(
        num_rows=rows,
        alphabet=r,
        columns=tuple(
            tuple(int(v) for v in column) for column in rng.integers(0, r, (columns, rows))
        ),
    )


def _properties(ctx: SuiteContext) -> list[tuple[str, object, object]]:
    count = ctx.sample_count(1_000)

    rng = ctx.rng(11)
    containment = 0
    for _ in range(count):
        rows, r = int(rng.integers(2, 5)), int(rng.integers(2, 4))
        a = _random_matrix(rng, rows, int(rng.integers(1, 8)), r)
        f = _random_matrix(rng, int(rng.integers(1, min(rows, 3) + 1)), int(rng.integers(1, 4)), r)
        row_order = [int(v) for v in rng.permutation(rows)]
        column_order = [int(v) for v in rng.permutation(a.num_columns)]
        shuffled = RMatrix(
            num_rows=rows,
            alphabet=r,
            columns=tuple(a.project(row_order).columns[index] for index in column_order),
        )
        containment += contains_config(a, f) != contains_config(shuffled, f)

    multiplicity = sum(
        sum(construction.tcm.multiplicities) != triple_count(m)
        for m in range(1, 31)
        for construction in (build_g(m), build_g(m, SplitRule.POWER_OF_TWO))
    )

    rng = ctx.rng(12)
    partitions = 0
    for _ in range(count):
        g = random_tcm(int(rng.integers(3, 8)), rng)
        partition = closed_sets(g)
        partitions += not all(is_closed(g, part) for part in partition.sets)
        multiplicity += sum(g.multiplicities) != triple_count(g.m)

    rng = ctx.rng(13)
    degrees = 0
    for index in range(count):
        m = 5 + index % 2
        optimum = local_search(random_tcm(m, rng), 2, seed=index, chain_depth=0).tcm
        multiplicity += sum(optimum.multiplicities) != triple_count(m)
        degrees += not (satisfies_degree_bound(optimum) and satisfies_unique_choice(optimum))

    argmax_rows: list[tuple[str, object, object]] = []
    for m in (4, 5, 6):
        limit = None if m <= 5 else ctx.sample_count(ARGMAX_SAMPLE)  # noqa: PLR2004
        argmaxes = list(h_argmaxes(m, 2, limit=limit, settings=ctx.settings))
        construction = build_g(m).tcm
        if weight(construction, 2) == EXACT_H_VALUES[m]:
            argmaxes.append(construction)

        size = len(argmaxes)
        argmax_rows.extend(
            [
                (
                    _case(property="argmax_closed_sets_min_2", m=m, argmaxes=size),
                    True,
                    any(min(closed_sets(g).sizes) >= 2 for g in argmaxes),  # noqa: PLR2004
                ),
                (
                    _case(property="argmax_unique_choice", m=m, argmaxes=size),
                    0,
                    sum(not satisfies_unique_choice(g) for g in argmaxes),
                ),
                (
                    _case(property="argmax_degree_bound", m=m, argmaxes=size),
                    0,
                    sum(not satisfies_degree_bound(g) for g in argmaxes),
                ),
            ],
        )

    return [
        (_case(property="containment_permutation", samples=count), 0, containment),
        (_case(property="multiplicity_sum"), 0, multiplicity),
        (_case(property="closed_set_partition", samples=count), 0, partitions),
        (_case(property="degree_profile", samples=count), 0, degrees),
    ] + argmax_rows


# Asymptotics and the upper recursion


def _convergence(_: SuiteContext) -> list[tuple[str, object, object]]:
    table = h2_table(256, 2)
    lam = lambda_estimate(2).value
    far = [
        m
        for m in range(64, 257)
        if abs(float(table.normalized(m)) - lam) >= CONVERGENCE_TOLERANCE
    ]
    partials = [g_partial(k, 2) for k in range(1, 21)]
    increasing = all(a < b for a, b in zip(partials, partials[1:], strict=False))
    return [
        (_case(m="64..256", tolerance=CONVERGENCE_TOLERANCE), [], far),
        (_case(g="g(k,2)", k="1..20"), True, increasing),
    ]


def _upper_recurrence(_: SuiteContext) -> list[tuple[str, object, object]]:
    rows: list[tuple[str, object, object]] = [
        (_case(m=row.m, check="ceiling"), True, row.within_ceiling and row.below_coefficient)
        for row in h_upper_table(40)
    ]
    rows.extend(
        (_case(m=row.m, check="h2<=g"), row.expected_holds, row.holds)
        for row in fleqg_check(64)
    )
    rows.extend(
        (_case(m=row.m, check="equality"), row.expected_equality, row.h2 == row.g)
        for row in fleqg_check(64)
        if row.expected_holds
    )
    rows.append((_case(check="5/12+1/64"), UPPER_COEFFICIENT, Fraction(5, 12) + Fraction(1, 64)))
    return rows


SUITES: Final[dict[str, tuple[Check, ...]]] = {
    "sauer": (Check(name="forb(m,2,K_k) = Sauer bound", run=_sauer),),
    "oracle": (Check(name="forb_exact = forb_via_choices", run=_oracle),),
    "h-table": (Check(name="H(m,2) exact", run=_h_table),),
    "h2-table": (Check(name="H2(m,2) recurrence", run=_h2_table),),
    "optimal-split": (Check(name="predicted split attains H2", run=_optimal_split),),
    "sandwich": (Check(name="H2 <= forb excess <= H", run=_sandwich),),
    "scc": (Check(name="c_scc = |valid columns|", run=_scc),),
    "block-bound": (Check(name="|valid columns| <= block bound", run=_block_bound),),
    "reduce": (Check(name="bad choices reduce to good ones", run=_reduce),),
    "lambda": (Check(name="lambda(2) and the 83/192 coefficient", run=_lambda),),
    "construction": (Check(name="w(G(m),2) = H2(m,2)", run=_construction),),
    "properties": (Check(name="randomised invariants", run=_properties),),
    "convergence": (Check(name="h2(m,2) close to lambda(2)", run=_convergence),),
    "upper-recurrence": (Check(name="closed-set upper recursion", run=_upper_recurrence),),
}
SUITE_NAMES: Final[tuple[str, ...]] = (*SUITES, "all")


def _render(value: object) -> str:
    if isinstance(value, bool):
        return str(value).lower()

    return str(value)


def run_suite(name: str, ctx: SuiteContext | None = None) -> list[CheckResult]:
    """Run one suite (or every suite for `all`) and return a row per case."""
    ctx = ctx or SuiteContext()
    if name == "all":
        return [result for suite in SUITES for result in run_suite(suite, ctx)]

    try:
        checks = SUITES[name]
    except KeyError as err:
        raise ValueError(f"Unknown suite {name!r}; expected one of {', '.join(SUITE_NAMES)}") from err

    results = []
    for check in checks:
        LOGGER.info("Running %s: %s", name, check.name)
        for case, expected, actual in check.run(ctx):
            result = CheckResult(
                suite=name,
                check=check.name,
                case=case,
                expected=_render(expected),
                actual=_render(actual),
                match=expected == actual,
            )
            if not result.match:
                LOGGER.error("%s / %s failed on %s: %s", name, check.name, case, result)

            results.append(result)

    return results


def results_table(results: list[CheckResult]) -> Table:
    """Lay out check results as a report table."""
    return Table.from_records(
        "checks",
        (result.model_dump() for result in results),
        columns=("suite", "check", "case", "expected", "actual", "match"),
    )
