from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from sparsenash.discretize import GridMixedStrategy, ProbabilityGrid, plan_simple, profile_key
from sparsenash.errors import DimensionMismatch, TooLarge, UnnormalizedStrategy
from sparsenash.game import GameDefinition, LocalClique, normalize, validate_game
from sparsenash.generators import gen_random_tree_polymatrix, gen_star_matching_pennies
from sparsenash.verify import (
    action_payoffs,
    brute_force_grid_equilibria,
    exact_regret,
    fine_grid_equilibrium,
    is_eps_msne,
)

HALF = (Fraction(1, 2), Fraction(1, 2))
PURE = (Fraction(1), Fraction(0))


def _pennies() -> GameDefinition:
    """Player 0 matches, player 1 mismatches; payoffs 1/0"""
    return gen_star_matching_pennies(2)


def _prisoners_dilemma() -> GameDefinition:
    table = np.array([[-1, -3], [0, -2]], dtype=object)
    return GameDefinition((2, 2), (LocalClique(0, (0, 1), table), LocalClique(1, (1, 0), table)))


def _pennies_plan(s: int):
    game = _pennies()
    plan = plan_simple(game, validate_game(game), Fraction(1, 2))
    return game, replace(plan, grids={0: ProbabilityGrid(s), 1: ProbabilityGrid(s)})


def test_uniform_pennies_has_no_regret() -> None:
    report = exact_regret(_pennies(), {0: HALF, 1: HALF})
    assert report.regrets == {0: 0, 1: 0}
    assert report.passed


def test_pure_pennies_regrets() -> None:
    report = exact_regret(_pennies(), {0: PURE, 1: PURE})
    assert report.regrets == {0: 0, 1: 1}
    assert report.max_regret == 1
    assert report.lines()[1] == "player 1: regret 1 (1) FAIL"


def test_regret_equal_to_epsilon_passes() -> None:
    game = _pennies()
    profile = {0: PURE, 1: HALF}
    assert exact_regret(game, profile).regrets[1] == Fraction(1, 2)
    assert is_eps_msne(game, profile, Fraction(1, 2))
    assert not is_eps_msne(game, profile, Fraction(49, 100))
    assert not is_eps_msne(game, {0: PURE, 1: PURE}, Fraction(1, 2))


def test_dominant_strategies() -> None:
    game = _prisoners_dilemma()
    defect = (0, 1)
    cooperate = (1, 0)
    assert exact_regret(game, {0: defect, 1: defect}).regrets == {0: 0, 1: 0}
    assert exact_regret(game, {0: cooperate, 1: cooperate}).regrets == {0: 1, 1: 1}


def test_action_payoffs_are_exact() -> None:
    game = _pennies()
    third = (Fraction(1, 3), Fraction(2, 3))
    assert action_payoffs(game, 0, {0: HALF, 1: third}) == [Fraction(1, 3), Fraction(2, 3)]


def test_grid_strategies_accepted() -> None:
    game = _pennies()
    profile = {i: GridMixedStrategy(i, (3, 3), 6) for i in game.players}
    assert exact_regret(game, profile).passed


def test_profile_must_cover_players() -> None:
    with pytest.raises(DimensionMismatch):
        exact_regret(_pennies(), {0: HALF})
    with pytest.raises(DimensionMismatch):
        exact_regret(_pennies(), {0: HALF, 1: (1, 0, 0)})
    with pytest.raises(UnnormalizedStrategy):
        exact_regret(_pennies(), {0: HALF, 1: (Fraction(1, 2), Fraction(1, 3))})


def test_regret_scales_with_payoffs() -> None:
    game = gen_random_tree_polymatrix(4, 3, seed=5)
    rng = np.random.default_rng(5)
    profile = {}
    for i in game.players:
        weights = [int(w) + 1 for w in rng.integers(0, 5, size=3)]
        profile[i] = tuple(Fraction(w, sum(weights)) for w in weights)
    scaled = game.replace(cliques=tuple(
        c.with_payoffs(c.payoffs * 3 + 7) if c.owner == 0 else c for c in game.cliques
    ))
    before = exact_regret(game, profile).regrets
    after = exact_regret(scaled, profile).regrets
    assert after[0] == 3 * before[0]
    assert all(after[i] == before[i] for i in game.players if i != 0)


def test_brute_force_on_small_grid() -> None:
    game, plan = _pennies_plan(2)
    exact = brute_force_grid_equilibria(game, plan, 0)
    assert [profile_key(p) for p in exact] == [((1, 1), (1, 1))]
    loose = brute_force_grid_equilibria(game, plan, Fraction(1, 2))
    assert ((1, 1), (1, 1)) in {profile_key(p) for p in loose}
    assert len(brute_force_grid_equilibria(game, plan, 1)) == 9


def test_brute_force_respects_cap() -> None:
    game, plan = _pennies_plan(24)
    with pytest.raises(TooLarge) as raised:
        brute_force_grid_equilibria(game, plan, Fraction(1, 2), cap=5)
    assert raised.value.estimated == 625
    assert raised.value.exit_code == 4


def test_fine_grid_equilibrium() -> None:
    profile, regret = fine_grid_equilibrium(normalize(_pennies()), 2)
    assert regret == 0
    assert profile[0].numerators == (1, 1)
    assert profile[1].numerators == (1, 1)
