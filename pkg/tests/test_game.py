import warnings
from fractions import Fraction

import numpy as np
import pytest

from sparsenash.errors import DegeneratePlayer, DimensionMismatch, MalformedGame, NotATree, NotPolymatrix
from sparsenash.game import (
    GameDefinition,
    GameKind,
    LocalClique,
    as_normalform,
    classify,
    clique_stats,
    exact_expected_clique_payoff,
    exact_local_payoff,
    normalize,
    polymatrix_bounds,
    root_tree,
    to_rational,
    validate_game,
)
from sparsenash.generators import gen_example_player1, gen_mixed_clique_game, gen_star_matching_pennies


def test_to_rational_is_exact() -> None:
    assert to_rational("0.1") == Fraction(1, 10)
    assert to_rational(0.1) == Fraction(1, 10)
    assert to_rational("1/3") == Fraction(1, 3)
    with pytest.raises(TypeError):
        to_rational(True)


def test_star_structure_stats() -> None:
    stats = validate_game(gen_star_matching_pennies(5))
    assert stats.kind is GameKind.POLYMATRIX
    assert stats.kappa_i == (4, 1, 1, 1, 1)
    assert stats.kappa == 4
    assert stats.kappa_prime == 2
    assert stats.k_i == (5, 2, 2, 2, 2)
    assert stats.affected[0] == frozenset({1, 2, 3, 4})
    assert stats.affected[3] == frozenset({0})


def test_owner_must_lead_members() -> None:
    clique = LocalClique(0, (1, 0), np.zeros((2, 2), dtype=object))
    game = GameDefinition((2, 2), (clique,))
    with pytest.raises(MalformedGame, match="owner"):
        validate_game(game)


def test_payoff_shape_checked() -> None:
    clique = LocalClique(0, (0, 1), np.zeros((2, 3), dtype=object))
    with pytest.raises(MalformedGame, match="4 entries expected"):
        validate_game(GameDefinition((2, 2), (clique,)))


def test_zero_action_player_rejected() -> None:
    with pytest.raises(MalformedGame):
        validate_game(GameDefinition((2, 0), ()))


def test_root_tree_on_star() -> None:
    game = gen_star_matching_pennies(5)
    tree = root_tree(game, 0)
    assert tree.children[0] == (1, 2, 3, 4)
    assert tree.parent[3] == 0
    assert tree.order()[0] == 0
    assert tree.postorder()[-1] == 0

    rerooted = root_tree(game, 2)
    assert rerooted.parent[2] is None
    assert rerooted.children[2] == (0,)
    assert rerooted.children[0] == (1, 3, 4)


def test_children_order_must_be_permutation() -> None:
    game = gen_star_matching_pennies(4)
    tree = root_tree(game, 0, {0: [3, 1, 2]})
    assert tree.children[0] == (3, 1, 2)
    with pytest.raises(MalformedGame):
        root_tree(game, 0, {0: [1, 2]})


def test_forest_hangs_off_root() -> None:
    zero = np.zeros((2, 2), dtype=object)
    cliques = (LocalClique(0, (0, 1), zero), LocalClique(2, (2, 3), zero))
    tree = root_tree(GameDefinition((2, 2, 2, 2), cliques), 0)
    assert tree.children[0] == (1, 2)
    assert tree.children[2] == (3,)


def test_mixed_clique_game_is_general_and_cyclic() -> None:
    game = gen_mixed_clique_game(seed=0)
    assert classify(game) is GameKind.GENERAL
    stats = validate_game(game)
    assert stats.kappa_prime == 3
    with pytest.raises(NotATree):
        root_tree(game, 0)


def test_example_player1_ranges_and_bounds() -> None:
    game = gen_example_player1()
    assert clique_stats(game.cliques[0]).range == 5
    # range of -b-gamma .. c+gamma
    assert clique_stats(game.cliques[1]).range == Fraction(11, 5)
    assert polymatrix_bounds(game, 0) == (1, 0)


def test_example_player1_local_payoffs() -> None:
    game = gen_example_player1()
    assert exact_local_payoff(game, 0, (0, 0, 0, 0)) == 1
    assert exact_local_payoff(game, 0, (0, 1, 0, 0)) == Fraction(9, 10)
    with pytest.raises(DimensionMismatch):
        exact_local_payoff(game, 0, (0, 2, 0, 0))


def test_expected_clique_payoff_mixes_exactly() -> None:
    game = gen_star_matching_pennies(2)
    clique = game.cliques[0]
    half = [Fraction(1, 2), Fraction(1, 2)]
    assert exact_expected_clique_payoff(clique, {0: 0}, {1: half}) == Fraction(1, 2)
    assert exact_expected_clique_payoff(clique, {0: 1}, {1: [1, 0]}) == 0


@pytest.mark.parametrize("shift", [Fraction(-3), Fraction(1, 7), Fraction(5, 2)])
def test_clique_range_ignores_constant_shift(shift: Fraction) -> None:
    rng = np.random.default_rng(5)
    for shape in [(2, 2), (3, 2), (2, 2, 2), (4,)]:
        members = tuple(range(len(shape)))
        payoffs = rng.integers(-9, 10, size=shape).astype(object)
        base = clique_stats(LocalClique(0, members, payoffs))
        moved = clique_stats(LocalClique(0, members, payoffs + shift))
        assert moved.range == base.range
        assert moved.u == base.u + shift
        assert moved.l == base.l + shift


def test_normalized_star_bounds() -> None:
    game = normalize(gen_star_matching_pennies(5))
    assert polymatrix_bounds(game, 0) == (1, 0)
    assert polymatrix_bounds(game, 3) == (1, 0)
    assert clique_stats(game.cliques[0]).range == Fraction(1, 4)
    assert game.metadata["normalized"] is True


def test_normalization_keeps_payoff_order() -> None:
    game = gen_example_player1()
    normalized = normalize(game)
    before = [exact_local_payoff(game, 0, (a, b, 0, 1)) for a in range(2) for b in range(2)]
    after = [exact_local_payoff(normalized, 0, (a, b, 0, 1)) for a in range(2) for b in range(2)]
    assert np.argsort(before).tolist() == np.argsort(after).tolist()
    assert all(0 <= v <= 1 for v in after)


def test_constant_player_flagged_degenerate() -> None:
    game = gen_example_player1()
    with pytest.warns(DegeneratePlayer):
        normalized = normalize(game)
    assert normalized.indifferent == frozenset({1, 2, 3})
    assert all(v == 0 for v in normalized.cliques[3].flat())


def test_bounds_need_polymatrix() -> None:
    with pytest.raises(NotPolymatrix):
        polymatrix_bounds(gen_mixed_clique_game(seed=1), 0)


def test_as_normalform_folds_cliques() -> None:
    game = gen_star_matching_pennies(3)
    folded = as_normalform(game)
    assert classify(folded) is GameKind.NORMAL_FORM
    assert folded.cliques[0].members == (0, 1, 2)
    for joint in [(0, 0, 0), (1, 0, 1), (0, 1, 1)]:
        assert exact_local_payoff(folded, 0, joint) == exact_local_payoff(game, 0, joint)
        assert exact_local_payoff(folded, 2, joint) == exact_local_payoff(game, 2, joint)


def test_isolated_player_without_cliques() -> None:
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        normalized = normalize(GameDefinition((3,), ()))
    assert normalized.indifferent == frozenset({0})
