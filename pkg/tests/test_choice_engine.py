from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import TYPE_CHECKING

import numpy as np
import pytest
from pydantic import ValidationError

from forbcfg.choice_engine import (
    GOOD_SELECTORS,
    SELECTORS_BY_EDGE_OPTION,
    TRIPLE_KINDS,
    Choice,
    ChoiceMode,
    Role,
    TripleKind,
    TriplePattern,
    alpha_r,
    block_bound,
    block_decomposition,
    c_scc,
    choice_from_tcm,
    closure,
    count_valid_columns,
    forb_from_choice,
    forb_upper_from_tcm_weight,
    forb_via_choices,
    implication_graph,
    implied_arcs,
    load_choice,
    nonedge_count,
    orient_tcm,
    random_choice,
    reduce_bad_choice,
    save_choice,
    uniform_orientation,
    valid_columns,
    weighted_nonedge_sum,
    witness_matrix,
)
from forbcfg.common import SearchStatus
from forbcfg.config import Settings
from forbcfg.exceptions import (
    BudgetExceededError,
    DomainError,
    InfeasibleSizeError,
    NotGoodChoiceError,
)
from forbcfg.matrix_core import ConfigPattern, contains_config
from forbcfg.recurrence import build_g
from forbcfg.tcm_opt import Tcm, relabel, tcm_of_choice, weight

if TYPE_CHECKING:
    from pathlib import Path


def test_selector_table() -> None:
    assert TRIPLE_KINDS[0] is TripleKind.IDENTITY
    assert TRIPLE_KINDS[7] is TripleKind.COMPLEMENT
    assert GOOD_SELECTORS == (1, 2, 3, 4, 5, 6)
    assert {TRIPLE_KINDS[s] for s in GOOD_SELECTORS} == {
        TripleKind.OUT_STAR,
        TripleKind.IN_STAR,
    }


@pytest.mark.parametrize(
    ("pattern", "selector", "kind"),
    [
        (ConfigPattern.a1(), 1, TripleKind.OUT_STAR),
        (ConfigPattern.a2(), 3, TripleKind.IN_STAR),
        (ConfigPattern.identity(), 0, TripleKind.IDENTITY),
        (ConfigPattern.identity_complement(), 7, TripleKind.COMPLEMENT),
    ],
)
def test_triple_pattern_from_matrix(
    pattern: ConfigPattern,
    selector: int,
    kind: TripleKind,
) -> None:
    triple_pattern = TriplePattern.from_matrix(pattern)

    assert triple_pattern.selector == selector
    assert triple_pattern.kind is kind


def test_implied_arcs() -> None:
    assert set(implied_arcs(TriplePattern(selector=1)) or ()) == {
        (Role.FIRST, Role.SECOND),
        (Role.FIRST, Role.THIRD),
    }
    assert set(implied_arcs(TriplePattern(selector=3)) or ()) == {
        (Role.FIRST, Role.THIRD),
        (Role.SECOND, Role.THIRD),
    }
    assert implied_arcs(TriplePattern(selector=0)) is None


def test_triple_pattern_rejects_two_columns_from_one_pair() -> None:
    with pytest.raises(ValueError, match="complementary pair"):
        TriplePattern.from_columns([(1, 0, 0), (0, 1, 1), (0, 0, 1)])


def test_choice_needs_every_triple() -> None:
    with pytest.raises(ValidationError, match="needs 4 selectors"):
        Choice(m=4, selectors=(1,))


def test_choice_rejects_unknown_selectors() -> None:
    with pytest.raises(ValidationError, match=r"0\.\.7"):
        Choice(m=3, selectors=(8,))


def test_good_and_bad_choices(a1_choice: Choice, identity_choice: Choice) -> None:
    assert a1_choice.is_good
    assert not identity_choice.is_good
    assert identity_choice.bad_triples == ((1, 2, 3),)

    with pytest.raises(NotGoodChoiceError):
        identity_choice.require_good()


def test_choice_file_round_trip(tmp_path: Path, example_choice: Choice) -> None:
    path = tmp_path / "nested" / "choice.json"

    save_choice(example_choice, path)

    assert load_choice(path) == example_choice


def test_valid_columns_of_a1(a1_choice: Choice) -> None:
    assert valid_columns(a1_choice, (1, 2, 3)) == (
        (0, 0, 0),
        (1, 0, 0),
        (1, 0, 1),
        (1, 1, 0),
        (1, 1, 1),
    )


@pytest.mark.parametrize("selector", range(8))
def test_every_triple_pattern_leaves_five_columns(selector: int) -> None:
    assert count_valid_columns(Choice(m=3, selectors=(selector,)), (1, 2, 3)) == 5


def test_small_sets_have_every_column(example_choice: Choice) -> None:
    assert count_valid_columns(example_choice, ()) == 1
    assert count_valid_columns(example_choice, (4,)) == 2
    assert count_valid_columns(example_choice, (2, 5)) == 4


def test_vertex_set_outside_ground_set(a1_choice: Choice) -> None:
    with pytest.raises(ValueError, match="not a subset"):
        count_valid_columns(a1_choice, (1, 4))


def test_valid_columns_row_guard(example_choice: Choice) -> None:
    with pytest.raises(InfeasibleSizeError):
        count_valid_columns(example_choice, (1, 2, 3), settings=Settings(valid_columns_max_rows=2))


def test_implication_graph_has_two_arcs_per_good_triple(example_choice: Choice) -> None:
    graph = implication_graph(example_choice, range(1, 6))

    assert len(graph.arcs) == 20
    assert not graph.closed


def test_implication_graph_ignores_bad_triples(identity_choice: Choice) -> None:
    assert implication_graph(identity_choice, (1, 2, 3)).arcs == ()


def test_closure_is_transitive(example_choice: Choice) -> None:
    graph = closure(example_choice, range(1, 6))

    assert graph.closed
    for (a, b), (c, d) in combinations(graph.arcs, 2):
        if b == c and a != d:
            assert (a, d) in graph.arc_set
        if d == a and c != b:
            assert (c, b) in graph.arc_set


def test_c_scc_of_a1(a1_choice: Choice) -> None:
    assert c_scc(a1_choice, (1, 2, 3)) == 5
    assert c_scc(a1_choice, ()) == 1


def test_c_scc_needs_a_good_choice(identity_choice: Choice) -> None:
    with pytest.raises(NotGoodChoiceError):
        c_scc(identity_choice, (1, 2, 3))


def test_c_scc_matches_brute_force(rng: np.random.Generator) -> None:
    for _ in range(40):
        choice = random_choice(5, rng, good_only=True)
        for size in range(6):
            for x in combinations(range(1, 6), size):
                assert c_scc(choice, x) == count_valid_columns(choice, x)


def test_block_decomposition_of_a1(a1_choice: Choice) -> None:
    blocks = block_decomposition(a1_choice, (1, 2, 3))

    assert blocks.blocks == ((1,), (2, 3))
    assert blocks.big_blocks == 1
    assert blocks.special_blocks == 0
    assert blocks.bound == 5
    assert blocks.order == (1, 2, 3)


def test_block_decomposition_of_empty_set(a1_choice: Choice) -> None:
    assert block_bound(a1_choice, ()) == 1


def test_block_bound_dominates_valid_columns(rng: np.random.Generator) -> None:
    for _ in range(300):
        m = int(rng.integers(3, 7))
        choice = random_choice(m, rng)
        x = tuple(int(v) + 1 for v in np.flatnonzero(rng.integers(0, 2, m)))

        assert count_valid_columns(choice, x) <= block_bound(choice, x)


def test_good_choice_block_bound_is_at_least_the_count(example_choice: Choice) -> None:
    for size in range(6):
        for x in combinations(range(1, 6), size):
            assert c_scc(example_choice, x) <= block_bound(example_choice, x)


def test_reduce_bad_choice_on_one_triple(identity_choice: Choice) -> None:
    reduced = reduce_bad_choice(identity_choice)

    assert reduced.is_good
    assert reduced.selectors == (3,)


def test_reduce_bad_choice_keeps_good_triples(rng: np.random.Generator) -> None:
    for _ in range(50):
        choice = random_choice(5, rng)
        reduced = reduce_bad_choice(choice)

        assert reduced.is_good
        for (triple, before), (_, after) in zip(choice.items(), reduced.items(), strict=True):
            if TRIPLE_KINDS[before].is_good:
                assert after == before, triple


def test_reduced_choice_nonedges_cover_block_bound(rng: np.random.Generator) -> None:
    for _ in range(50):
        choice = random_choice(5, rng)
        reduced = reduce_bad_choice(choice)
        for size in range(6):
            for x in combinations(range(1, 6), size):
                assert nonedge_count(reduced, x) + len(x) + 1 >= block_bound(choice, x)


def test_forb_from_choice_three_rows(a1_choice: Choice, identity_choice: Choice) -> None:
    assert forb_from_choice(3, 3, a1_choice) == 24
    assert forb_from_choice(3, 3, identity_choice) == 24


def test_forb_from_choice_of_the_example(example_choice: Choice) -> None:
    assert forb_from_choice(5, 3, example_choice) == 142
    assert forb_upper_from_tcm_weight(5, 3, 30) == 142


def test_forb_from_choice_of_the_construction() -> None:
    assert forb_from_choice(4, 3, choice_from_tcm(build_g(4).tcm)) == 60


def test_forb_from_choice_argument_checks(a1_choice: Choice) -> None:
    with pytest.raises(ValueError, match="not 4"):
        forb_from_choice(4, 3, a1_choice)

    with pytest.raises(DomainError):
        forb_from_choice(3, 1, a1_choice)

    with pytest.raises(InfeasibleSizeError):
        forb_from_choice(3, 3, a1_choice, settings=Settings(forb_from_choice_max_m=2))


def test_weighted_nonedge_sum_is_scaled_tcm_weight(example_choice: Choice) -> None:
    assert weighted_nonedge_sum(example_choice, 3) == 30
    # 2^3 · (2·(3/2)^3 + 2·(3/2)^2 + 6)
    assert weighted_nonedge_sum(example_choice, 4) == 138


def test_weighted_nonedge_sum_needs_three_symbols(example_choice: Choice) -> None:
    with pytest.raises(DomainError):
        weighted_nonedge_sum(example_choice, 2)


def test_forb_via_choices_three_rows() -> None:
    every = forb_via_choices(3, 3, ChoiceMode.ALL)
    good = forb_via_choices(3, 3, ChoiceMode.GOOD_ONLY)

    assert every.value == good.value == 24
    assert every.evaluated == 8
    assert good.evaluated == 1
    assert every.status is SearchStatus.EXACT
    assert every.choice.selectors == (0,)
    assert every.tcm is None
    assert good.tcm is not None


def test_forb_via_choices_two_rows() -> None:
    result = forb_via_choices(2, 3)

    assert result.value == 9
    assert result.evaluated == 1


@pytest.mark.slow
@pytest.mark.parametrize("mode", [ChoiceMode.ALL, ChoiceMode.GOOD_ONLY])
def test_forb_via_choices_four_rows(mode: ChoiceMode) -> None:
    assert forb_via_choices(4, 3, mode).value == 60


def test_forb_via_choices_sampling_is_seeded() -> None:
    first = forb_via_choices(4, 3, ChoiceMode.SAMPLE, samples=30, seed=5)
    second = forb_via_choices(4, 3, ChoiceMode.SAMPLE, samples=30, seed=5)

    assert first == second
    assert first.status is SearchStatus.LOWER_BOUND
    assert first.value <= 60


def test_forb_via_choices_sampling_needs_a_seed() -> None:
    with pytest.raises(ValueError, match="explicit seed"):
        forb_via_choices(4, 3, ChoiceMode.SAMPLE, samples=30)


def test_forb_via_choices_budget() -> None:
    result = forb_via_choices(4, 3, budget=8)

    assert result.status is SearchStatus.LOWER_BOUND
    assert result.evaluated == 8
    assert result.value <= 60

    with pytest.raises(BudgetExceededError):
        forb_via_choices(4, 3, budget=8, strict=True)


def test_forb_via_choices_size_guard() -> None:
    with pytest.raises(InfeasibleSizeError):
        forb_via_choices(4, 3, settings=Settings(max_choices=100))


def test_selectors_by_edge_option() -> None:
    assert sorted(s for group in SELECTORS_BY_EDGE_OPTION for s in group) == list(GOOD_SELECTORS)
    assert all(len(group) == 2 for group in SELECTORS_BY_EDGE_OPTION)

    for option, group in enumerate(SELECTORS_BY_EDGE_OPTION):
        for selector in group:
            g = tcm_of_choice(Choice(m=3, selectors=(selector,)))
            assert g == Tcm.from_options(3, (option,))


def test_uniform_orientation_of_a_relabelled_construction() -> None:
    g = relabel(build_g(5).tcm, (3, 5, 1, 4, 2))

    oriented = uniform_orientation(g)

    assert oriented is not None
    assert oriented.uniformly_directed
    assert tcm_of_choice(oriented.choice) == g


def test_pruned_good_search_stops_at_the_weight_bound() -> None:
    result = forb_via_choices(5, 3, ChoiceMode.GOOD_ONLY, budget=1)

    assert result.evaluated == 1
    assert result.choice.is_good
    assert result.status is SearchStatus.EXACT or result.value < 142


def test_pruned_good_search_guards_the_tcm_count() -> None:
    with pytest.raises(InfeasibleSizeError):
        forb_via_choices(5, 3, ChoiceMode.GOOD_ONLY, settings=Settings(max_choices=100))


@pytest.mark.slow
@pytest.mark.parametrize("r", [3, 4])
def test_pruned_good_search_matches_exhaustive_search(r: int) -> None:
    pruned = forb_via_choices(4, r, ChoiceMode.GOOD_ONLY)
    exhaustive = forb_via_choices(4, r, ChoiceMode.GOOD_ONLY, prune=False)

    assert pruned.value == exhaustive.value
    assert exhaustive.evaluated == 6**4


@pytest.mark.slow
def test_good_only_five_rows() -> None:
    result = forb_via_choices(5, 3, ChoiceMode.GOOD_ONLY)

    assert result.value == 142
    assert result.status is SearchStatus.EXACT
    assert result.tcm is not None
    assert weight(result.tcm, 2) == 30


def test_choice_from_tcm_round_trip(example_tcm: Tcm, example_choice: Choice) -> None:
    assert example_choice.is_good
    assert tcm_of_choice(example_choice) == example_tcm


def test_orient_example_is_uniformly_directed(example_tcm: Tcm) -> None:
    assert orient_tcm(example_tcm).uniformly_directed


def test_orient_flags_a_middle_vertex() -> None:
    g = Tcm.from_mapping(3, {(1, 2, 3): (1, 3)})

    oriented = orient_tcm(g)

    assert not oriented.uniformly_directed
    assert tcm_of_choice(oriented.choice) == g
    assert orient_tcm(g, order=(2, 1, 3)).uniformly_directed


def test_orient_rejects_bad_orders(example_tcm: Tcm) -> None:
    with pytest.raises(ValueError, match="not an ordering"):
        orient_tcm(example_tcm, order=(1, 2, 3))


def test_witness_matrix_avoids_m(a1_choice: Choice, example_choice: Choice) -> None:
    for m, choice, expected in ((3, a1_choice, 24), (5, example_choice, 142)):
        a = witness_matrix(m, 3, choice)

        assert a.num_columns == expected
        assert a.is_simple
        assert not contains_config(a, ConfigPattern.m())


def test_random_good_choice(rng: np.random.Generator) -> None:
    assert all(random_choice(6, rng, good_only=True).is_good for _ in range(20))


def test_alpha_r() -> None:
    assert alpha_r(3) == 2
    assert alpha_r(4) == Fraction(3, 2)

    with pytest.raises(DomainError):
        alpha_r(2)
