from __future__ import annotations

from itertools import permutations
from json import dumps
from typing import TYPE_CHECKING

import pytest
from pydantic import ValidationError

from forbcfg.common import SearchStatus
from forbcfg.config import Settings
from forbcfg.exceptions import BudgetExceededError, DomainError, InfeasibleSizeError
from forbcfg.matrix_core import (
    BuiltinPattern,
    ConfigPattern,
    RMatrix,
    at_most_one_zero_matrix,
    contains_config,
    forb_exact,
    load_pattern,
    pattern_by_name,
    sauer_bound,
)

if TYPE_CHECKING:
    from pathlib import Path


def test_rmatrix_rejects_entries_outside_alphabet() -> None:
    with pytest.raises(ValidationError, match="outside 0..1"):
        RMatrix(num_rows=2, alphabet=2, columns=((0, 2),))


def test_rmatrix_rejects_short_columns() -> None:
    with pytest.raises(ValidationError, match="expected 3"):
        RMatrix(num_rows=3, alphabet=2, columns=((0, 1),))


def test_from_rows_and_project() -> None:
    a = RMatrix.from_rows([[0, 1, 2], [1, 1, 0]], alphabet=3)

    assert a.columns == ((0, 1), (1, 1), (2, 0))
    assert a.row(0) == (0, 1, 2)
    assert a.project([1, 0]).columns == ((1, 0), (1, 1), (0, 2))
    assert len(a) == 3
    assert a.is_simple


def test_pattern_file_round_trip(tmp_path: Path) -> None:
    path = tmp_path / "k2.json"
    path.write_text(dumps(ConfigPattern.complete(2).to_json_dict()))

    loaded = load_pattern(path)

    assert loaded.columns == ConfigPattern.complete(2).columns
    assert loaded.name == "k2"


def test_load_pattern_resolves_builtin_names() -> None:
    assert load_pattern("M") == ConfigPattern.m()


def test_load_pattern_rejects_bad_json(tmp_path: Path) -> None:
    path = tmp_path / "broken.json"
    path.write_text("{not json")

    with pytest.raises(ValueError, match="not valid JSON"):
        load_pattern(path)


def test_unknown_pattern_lists_builtins() -> None:
    with pytest.raises(ValueError, match="expected one of") as exc_info:
        pattern_by_name("Q")

    assert all(name.value in str(exc_info.value) for name in BuiltinPattern)


def test_matrix_contains_itself() -> None:
    assert contains_config(ConfigPattern.m(), ConfigPattern.m())


def test_at_most_one_zero_matrix_avoids_m() -> None:
    a = at_most_one_zero_matrix(4, 2)

    assert a.num_columns == 5
    assert not contains_config(a, ConfigPattern.m())


def test_complete_matrix_contains_m() -> None:
    assert contains_config(ConfigPattern.complete(3), ConfigPattern.m())


def test_repeated_pattern_columns_need_distinct_host_columns() -> None:
    f = RMatrix.from_rows([[0, 0]])

    assert contains_config(RMatrix.from_rows([[0, 0, 1]]), f)
    assert not contains_config(RMatrix.from_rows([[0, 1]]), f)


def test_pattern_taller_than_host_is_not_contained() -> None:
    assert not contains_config(ConfigPattern.complete(2), ConfigPattern.complete(3))


def test_containment_ignores_row_and_column_order() -> None:
    a = RMatrix.from_rows([[0, 1, 1, 0], [1, 0, 1, 1], [0, 0, 1, 1]])
    expected = contains_config(a, ConfigPattern.m())

    for rows in permutations(range(3)):
        shuffled = a.project(list(rows))
        reordered = RMatrix(num_rows=3, alphabet=2, columns=shuffled.columns[::-1])
        assert contains_config(reordered, ConfigPattern.m()) == expected


@pytest.mark.parametrize(
    ("m", "r", "pattern", "expected"),
    [
        (2, 2, ConfigPattern.complete(2), 3),
        (2, 2, ConfigPattern.complete(3), 4),
        (2, 3, ConfigPattern.m(), 9),
        (3, 3, ConfigPattern.m(), 24),
    ],
)
def test_forb_exact_known_values(m: int, r: int, pattern: ConfigPattern, expected: int) -> None:
    result = forb_exact(m, r, pattern)

    assert result.value == expected
    assert result.status is SearchStatus.EXACT
    assert result.witness.num_columns == expected
    assert result.witness.is_simple
    assert not contains_config(result.witness, pattern)


@pytest.mark.slow
def test_forb_exact_three_rows_four_symbols() -> None:
    assert forb_exact(3, 4, ConfigPattern.m()).value == 61


@pytest.mark.parametrize("m", range(1, 5))
@pytest.mark.parametrize("k", range(1, 4))
def test_forb_exact_matches_sauer_bound(m: int, k: int) -> None:
    assert forb_exact(m, 2, ConfigPattern.complete(k)).value == sauer_bound(m, k)


def test_forb_exact_budget_gives_lower_bound() -> None:
    result = forb_exact(3, 3, ConfigPattern.m(), budget=5)

    assert result.status is SearchStatus.LOWER_BOUND
    assert result.value <= 24
    assert not contains_config(result.witness, ConfigPattern.m())


def test_forb_exact_strict_budget_raises() -> None:
    with pytest.raises(BudgetExceededError) as exc_info:
        forb_exact(3, 3, ConfigPattern.m(), budget=5, strict=True)

    assert exc_info.value.lower_bound <= 24


def test_forb_exact_guards_candidate_count() -> None:
    with pytest.raises(InfeasibleSizeError):
        forb_exact(2, 3, ConfigPattern.m(), settings=Settings(forb_exact_max_columns=8))


def test_forb_exact_needs_two_symbols() -> None:
    with pytest.raises(DomainError):
        forb_exact(2, 1, ConfigPattern.m())


def test_forb_exact_degenerate_pattern() -> None:
    result = forb_exact(3, 3, ConfigPattern(num_rows=2, alphabet=2, name="empty"))

    assert result.value == 0
    assert result.witness.num_columns == 0
    assert result.witness.num_rows == 3
    assert result.status is SearchStatus.EXACT
    assert result.nodes == 0
    assert contains_config(result.witness, ConfigPattern(num_rows=0, alphabet=2))


@pytest.mark.parametrize(("m", "r"), [(2, 3), (3, 3), (3, 4)])
def test_at_most_one_zero_matrix_size(m: int, r: int) -> None:
    a = at_most_one_zero_matrix(m, r)

    assert a.num_columns == (r - 1) ** m + m * (r - 1) ** (m - 1)
    assert not contains_config(a, ConfigPattern.m())
