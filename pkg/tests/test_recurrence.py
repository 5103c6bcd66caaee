from __future__ import annotations

from fractions import Fraction

import pytest

from forbcfg.common import SearchStatus
from forbcfg.exceptions import DivergentParameterError, DomainError
from forbcfg.recurrence import (
    CLOSED_SET_CEILING,
    UPPER_COEFFICIENT,
    SplitRule,
    bounds,
    build_g,
    construction_weight,
    epsilon,
    fleqg_check,
    g_partial,
    general_upper_coefficient,
    h2_bar,
    h2_table,
    h_table_check,
    h_upper_table,
    lambda_estimate,
    power_of_two_exponent,
    predicted_split,
    sandwich_check,
)
from forbcfg.tcm_opt import weight

H2_VALUES = {1: 0, 2: 1, 3: 4, 4: 12, 5: 30, 6: 73, 7: 172, 8: 400}


def test_h2_table_values() -> None:
    table = h2_table(8, 2)

    assert {m: table.value(m) for m in range(1, 9)} == H2_VALUES
    assert table.m_max == 8
    assert table.normalized(4) == Fraction(3, 8)


def test_h2_table_six_vertex_split() -> None:
    row = h2_table(6, 2).row(6)

    assert row.splits == ((3, 3),)
    assert row.predicted == (3, 3)
    assert row.agrees


def test_h2_table_splits_agree_with_the_power_of_two_rule() -> None:
    table = h2_table(48, 2)

    assert all(row.agrees for row in table.rows[2:])


def test_h2_table_float_alpha() -> None:
    table = h2_table(8, 2.0)

    assert table.value(8) == pytest.approx(400.0)
    assert table.row(6).splits == ((3, 3),)


def test_h2_table_small_alpha_has_no_prediction() -> None:
    table = h2_table(5, Fraction(3, 2))

    assert table.value(3) == Fraction(7, 2)
    assert table.row(5).predicted is None
    assert table.row(5).agrees is None


def test_h2_table_arguments() -> None:
    with pytest.raises(DomainError):
        h2_table(0, 2)

    with pytest.raises(DomainError):
        h2_table(5, Fraction(1, 2))

    with pytest.raises(KeyError):
        h2_table(5, 2).row(6)


@pytest.mark.parametrize(
    ("m", "k"),
    [(3, 1), (5, 1), (6, 2), (11, 2), (12, 3), (23, 3), (24, 4)],
)
def test_power_of_two_exponent(m: int, k: int) -> None:
    assert power_of_two_exponent(m) == k


def test_power_of_two_exponent_domain() -> None:
    with pytest.raises(DomainError):
        power_of_two_exponent(2)


def test_predicted_split_at_six_vertices() -> None:
    below = predicted_split(6, 2)
    above = predicted_split(6, 3)

    assert below.parts == (3, 3)
    assert below.confirmed
    assert above.parts == (4, 2)
    assert above.confirmed
    assert below.note is not None


def test_predicted_split_elsewhere() -> None:
    split = predicted_split(12)

    assert split.k == 3
    assert split.parts == (8, 4)
    assert split.confirmed is None


@pytest.mark.parametrize("m", range(1, 9))
def test_construction_attains_h2(m: int) -> None:
    construction = build_g(m)

    assert weight(construction.tcm, 2) == H2_VALUES[m]
    assert construction.tree.leaves() == tuple(range(1, m + 1))


def test_construction_tree() -> None:
    assert build_g(3).tree.describe() == "3=(2)+(1)"
    assert build_g(6).tree.describe() == "6=(3=(2)+(1))+(3=(2)+(1))"
    assert build_g(1).tree.describe() == "1"


def test_power_of_two_construction_at_six_vertices() -> None:
    assert h2_bar(6, 2) == 72
    assert construction_weight(6, 2, SplitRule.POWER_OF_TWO) == 72
    assert construction_weight(6, 2) == 73


@pytest.mark.parametrize("m", [9, 17, 30])
def test_power_of_two_construction_matches_its_recurrence(m: int) -> None:
    assert construction_weight(m, 2, SplitRule.POWER_OF_TWO) == h2_bar(m, 2)


def test_construction_domain() -> None:
    with pytest.raises(DomainError):
        build_g(0)


def test_g_partial() -> None:
    assert g_partial(1, 2) == Fraction(1, 4)
    assert g_partial(2, 2) == Fraction(3, 8)
    assert g_partial(3, 2.0) == pytest.approx(0.390625)

    with pytest.raises(DivergentParameterError):
        g_partial(3, 1)


def test_lambda_estimate() -> None:
    estimate = lambda_estimate(2)

    assert estimate.value == pytest.approx(0.390747, abs=1e-6)
    assert estimate.tail_bound < 1e-9
    assert lambda_estimate(Fraction(3, 2)).value > estimate.value


def test_lambda_estimate_arguments() -> None:
    with pytest.raises(DivergentParameterError):
        lambda_estimate(1)

    with pytest.raises(DomainError):
        lambda_estimate(2, eps=0)


def test_epsilon() -> None:
    assert epsilon(6) == 0
    assert epsilon(8) == Fraction(3, 256)


def test_general_upper_coefficient() -> None:
    assert general_upper_coefficient(2) == UPPER_COEFFICIENT
    assert general_upper_coefficient(3) < UPPER_COEFFICIENT

    with pytest.raises(DomainError):
        general_upper_coefficient(Fraction(3, 2))


def test_h_upper_table() -> None:
    rows = h_upper_table(40)

    assert rows[3].bound == Fraction(3, 8)
    assert rows[3].exact
    assert rows[6].bound == CLOSED_SET_CEILING
    assert not rows[6].exact
    assert all(row.within_ceiling and row.below_coefficient for row in rows)


def test_fleqg_check() -> None:
    rows = fleqg_check(64)

    assert {row.m for row in rows if not row.holds} == {3, 6, 7}
    assert all(row.matches for row in rows)


def test_bounds_four_rows() -> None:
    report = bounds(4, 3)

    assert report.alpha == 2
    assert report.trivial_lower == 48
    assert report.trivial_upper == 64
    assert report.forb_lower == 60
    assert float(report.forb_upper) == pytest.approx(61.8333, abs=1e-4)
    assert report.inconsistencies() == []


def test_bounds_three_rows_four_symbols() -> None:
    report = bounds(3, 4)

    assert report.alpha == Fraction(3, 2)
    assert report.forb_lower == 61
    assert report.general_upper_coefficient is None
    assert report.inconsistencies() == []


@pytest.mark.parametrize("m", [1, 2, 3])
def test_bounds_few_rows_are_consistent(m: int) -> None:
    report = bounds(m, 3)

    assert report.inconsistencies() == []
    assert report.forb_lower <= report.trivial_upper


def test_bounds_one_row_upper_exceeds_trivial_upper() -> None:
    report = bounds(1, 3)

    assert report.trivial_upper == 3
    assert report.forb_upper > report.trivial_upper
    assert report.inconsistencies() == []


def test_bounds_arguments() -> None:
    with pytest.raises(DomainError):
        bounds(4, 2)

    with pytest.raises(DomainError):
        bounds(0, 3)


@pytest.mark.slow
def test_sandwich_four_rows() -> None:
    report = sandwich_check(4, 3)

    assert report.lower == report.upper == report.excess == 12
    assert not report.one_sided
    assert report.holds


def test_sandwich_three_rows_four_symbols() -> None:
    report = sandwich_check(3, 4)

    assert report.excess == report.lower == report.upper == 7
    assert report.forb == 61
    assert report.holds


def test_sandwich_two_rows() -> None:
    report = sandwich_check(2, 3)

    assert report.excess == 1
    assert report.holds


def test_sandwich_falls_back_to_the_construction() -> None:
    report = sandwich_check(5, 3)

    assert report.forb == 142
    assert report.forb_source == "construction"
    assert report.forb_status is SearchStatus.LOWER_BOUND
    assert report.one_sided
    assert report.holds


def test_sandwich_domain() -> None:
    with pytest.raises(DomainError):
        sandwich_check(3, 2)


def test_h_table_check_matches_the_construction() -> None:
    checked = h_table_check(5)

    assert list(checked) == [1, 2, 3, 4, 5]
    assert all(h == h2 == H2_VALUES[m] for m, (h, h2) in checked.items())


@pytest.mark.slow
def test_h_table_check_six_vertices() -> None:
    assert h_table_check(6)[6] == (73, 73)
