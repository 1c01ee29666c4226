from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from sparsenash.csp import build_csp, check_assignment, complete_assignment, iter_solutions, p_name, s_name
from sparsenash.discretize import ProbabilityGrid, plan_refined, plan_simple, profile_key, project
from sparsenash.dp import (
    PolymatrixTreeDP,
    SumsetMask,
    collect_messages,
    dp_feasible_profiles,
    reachable_partial_sums,
    solve_polymatrix_tree,
)
from sparsenash.errors import InfeasibleAtRoot, NotPolymatrix, PlanMismatch
from sparsenash.game import GameDefinition, LocalClique, normalize, root_tree, validate_game
from sparsenash.generators import gen_mixed_clique_game, gen_random_tree_polymatrix, gen_star_matching_pennies
from sparsenash.verify import brute_force_grid_equilibria, exact_regret

TENTH = Fraction(1, 10)


def _setup(game, epsilon, root=0, children_order=None):
    game = normalize(game)
    plan = plan_simple(game, validate_game(game), epsilon)
    return game, plan, root_tree(game, root, children_order)


def _star_profile():
    """Center uniform; leaves 1, 2 matched by the center, 3, 4 mismatched"""
    return {
        0: (Fraction(1, 2), Fraction(1, 2)),
        1: (Fraction(3, 4), Fraction(1, 4)),
        2: (Fraction(0), Fraction(1)),
        3: (Fraction(1, 2), Fraction(1, 2)),
        4: (Fraction(0), Fraction(1)),
    }


def test_star_solution_is_certified() -> None:
    game, plan, tree = _setup(gen_star_matching_pennies(5), TENTH)
    result = solve_polymatrix_tree(game, tree, plan, TENTH)
    assert result.verified
    assert result.report.max_regret <= TENTH
    assert result.solver == "polymatrix"
    assert set(result.partial_sums) == set(game.players)
    assert result.stats["table_bytes"] > 0


def test_assignment_records_one_witness_per_child() -> None:
    game, plan, tree = _setup(gen_star_matching_pennies(5), TENTH)
    dp = PolymatrixTreeDP(game, tree, plan)
    dp.collect()
    choice = dp.assign()
    assert len(dp.witnesses) == 4
    for (owner, level, _), (child_index, _) in dp.witnesses.cells.items():
        assert owner == 0
        assert choice[tree.children[0][level - 1]] == child_index


@pytest.mark.parametrize("game", [
    gen_star_matching_pennies(5),
    gen_random_tree_polymatrix(5, 2, seed=4, shape="path"),
], ids=["star", "path"])
def test_partial_sums_match_the_csp_chain(game) -> None:
    game, plan, tree = _setup(game, Fraction(1, 2))
    dp = PolymatrixTreeDP(game, tree, plan)
    choice = dp.assign()
    sums = dp.partial_sums(choice)
    strategies = dp.strategies(choice)

    csp = build_csp(game, plan, Fraction(1, 2), "simple", tree)
    values = complete_assignment(csp, {
        p_name(i, a): k for i, strategy in strategies.items() for a, k in enumerate(strategy.numerators)
    })
    kappa = validate_game(game).kappa_i
    for i in game.players:
        if kappa[i]:
            assert sums[i] == tuple(values[s_name(i, kappa[i], a)] for a in range(2))

    leaf = tree.postorder()[0]
    assert not tree.children[leaf]
    parent = tree.parent[leaf]
    assert sums[leaf] == tuple(int(x) for x in dp.nodes[leaf].towards_parent[choice[parent]])


def test_known_star_profile_satisfies_csp() -> None:
    game, plan, tree = _setup(gen_star_matching_pennies(5), TENTH)
    profile = _star_profile()
    report = exact_regret(game, profile, TENTH)
    assert report.regrets[0] == Fraction(1, 16)
    assert all(report.regrets[i] == 0 for i in range(1, 5))

    csp = build_csp(game, plan, TENTH, "simple", tree)
    probabilities = {
        p_name(i, a): int(p[a] * plan.s(i)) for i, p in profile.items() for a in range(2)
    }
    assert check_assignment(csp, complete_assignment(csp, probabilities))


def test_children_order_does_not_break_certificate() -> None:
    game, plan, tree = _setup(gen_star_matching_pennies(5), TENTH, children_order={0: [4, 3, 2, 1]})
    assert solve_polymatrix_tree(game, tree, plan, TENTH).verified


def test_solver_is_deterministic() -> None:
    game, plan, tree = _setup(gen_random_tree_polymatrix(6, 2, seed=3), Fraction(1, 4))
    first = solve_polymatrix_tree(game, tree, plan, Fraction(1, 4))
    second = solve_polymatrix_tree(game, tree, plan, Fraction(1, 4))
    assert profile_key(first.strategies) == profile_key(second.strategies)


def test_pennies_solution_is_on_the_oracle_list() -> None:
    game, plan, tree = _setup(gen_star_matching_pennies(2), Fraction(1, 2))
    result = solve_polymatrix_tree(game, tree, plan, Fraction(1, 2))
    oracle = {profile_key(p) for p in brute_force_grid_equilibria(game, plan, Fraction(1, 2))}
    assert profile_key(result.strategies) in oracle


def test_single_player_gets_uniform() -> None:
    game, plan, tree = _setup(GameDefinition((2,), ()), Fraction(1, 2))
    result = solve_polymatrix_tree(game, tree, plan, Fraction(1, 2))
    assert result.strategies[0].numerators == (1, 1)
    assert result.report.regrets == {0: 0}


def test_literal_slack_still_returns() -> None:
    game, plan, tree = _setup(gen_star_matching_pennies(3), Fraction(1, 2))
    result = solve_polymatrix_tree(game, tree, plan, Fraction(1, 2), slack="literal")
    assert result.slack == "literal"
    assert result.report is not None


def test_rejects_other_games_and_plans() -> None:
    star, plan, tree = _setup(gen_star_matching_pennies(5), TENTH)
    with pytest.raises(NotPolymatrix):
        PolymatrixTreeDP(gen_mixed_clique_game(seed=0), tree, plan)
    refined = plan_refined(star, validate_game(star), TENTH)
    with pytest.raises(PlanMismatch):
        PolymatrixTreeDP(star, tree, refined)
    with pytest.raises(PlanMismatch):
        solve_polymatrix_tree(star, tree, plan, Fraction(1, 5))


def test_odd_grid_without_slack_is_infeasible() -> None:
    game, plan, tree = _setup(gen_star_matching_pennies(2), Fraction(1, 2))
    tight = replace(
        plan,
        sizing_epsilon=Fraction(1, 10**6),
        grids={0: ProbabilityGrid(3), 1: ProbabilityGrid(3)},
    )
    with pytest.raises(InfeasibleAtRoot) as raised:
        solve_polymatrix_tree(game, tree, tight, Fraction(1, 2))
    assert raised.value.exit_code == 3
    assert raised.value.diagnostics["grid_denominators"] == {0: 3, 1: 3}


def test_reachable_partial_sums() -> None:
    matcher = np.array([[1, 0], [0, 1]], dtype=object)
    game = GameDefinition((2, 2), (LocalClique(0, (0, 1), matcher),))
    plan = plan_simple(game, validate_game(game), 1)
    assert (plan.s(0), plan.s(1)) == (2, 12)
    dp = PolymatrixTreeDP(game, root_tree(game, 0), plan)

    lattice = plan.lattices[0]
    expected = {
        (0, project(Fraction(12 - k, 12), lattice) - project(Fraction(k, 12), lattice))
        for k in range(13)
    }
    reached = reachable_partial_sums(dp, 0, (1, 1))
    assert reached == expected
    assert len(reached) >= 2
    assert reachable_partial_sums(dp, 0, (1, 1), prefix=0) == {(0, 0)}
    assert reachable_partial_sums(dp, 1, 0) == {(0, 0)}


def test_identical_child_columns_collapse() -> None:
    flat = np.array([[1, 1], [0, 0]], dtype=object)
    game = GameDefinition((2, 2), (LocalClique(0, (0, 1), flat),))
    plan = plan_simple(game, validate_game(game), 1)
    dp = PolymatrixTreeDP(game, root_tree(game, 0), plan)
    assert len(reachable_partial_sums(dp, 0, (2, 0))) == 1


def test_messages_depend_only_on_their_subtree() -> None:
    game = gen_random_tree_polymatrix(4, 2, seed=9, shape="path")
    clique = game.cliques[0]
    assert clique.members == (0, 1)
    swapped = game.replace(cliques=(clique.with_payoffs(clique.payoffs[::-1]),) + game.cliques[1:])

    tree = root_tree(game, 1)
    assert tree.children[1] == (0, 2)
    epsilon = Fraction(1, 2)
    plan = plan_simple(game, validate_game(game), epsilon)
    assert plan == plan_simple(swapped, validate_game(swapped), epsilon)

    before = collect_messages(game, tree, plan)
    after = collect_messages(swapped, tree, plan)
    for child in (2, 3):
        assert before.arcs[child].pairs() == after.arcs[child].pairs()


def test_sumset_minkowski() -> None:
    mask = SumsetMask.zero(1).minkowski(np.array([[0], [3]]))
    assert mask.points().ravel().tolist() == [0, 3]
    grown = mask.minkowski(np.array([[-1], [1]]))
    assert grown.points().ravel().tolist() == [-1, 1, 2, 4]
    assert grown.contains([2])
    assert not grown.contains([0])
    assert SumsetMask.zero(1).minkowski(np.zeros((0, 1), dtype=np.int64)).is_empty


def _feasible_sets(game, epsilon):
    plan = plan_simple(game, validate_game(game), epsilon)
    tree = root_tree(game, 0)
    csp = build_csp(game, plan, epsilon, "simple", tree)
    from_csp = {profile_key(csp.profile(a)) for a in iter_solutions(csp)}
    from_dp = {profile_key(p) for p in dp_feasible_profiles(game, tree, plan)}
    oracle = {profile_key(p) for p in brute_force_grid_equilibria(game, plan, epsilon)}
    return from_csp, from_dp, oracle


@pytest.mark.parametrize("seed", range(20))
@pytest.mark.parametrize("epsilon", [Fraction(1), Fraction(1, 2)])
def test_dp_matches_csp_on_pairs(seed: int, epsilon: Fraction) -> None:
    game = normalize(gen_random_tree_polymatrix(2, 2, seed=seed))
    from_csp, from_dp, oracle = _feasible_sets(game, epsilon)
    assert from_dp
    assert from_csp == from_dp
    assert from_dp <= oracle


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(10))
def test_dp_matches_csp_on_triples(seed: int) -> None:
    game = normalize(gen_random_tree_polymatrix(3, 2, seed=100 + seed))
    from_csp, from_dp, oracle = _feasible_sets(game, Fraction(1))
    assert from_csp == from_dp
    assert from_dp <= oracle


@pytest.mark.slow
@pytest.mark.parametrize("n", range(2, 9))
@pytest.mark.parametrize("epsilon", [Fraction(1, 2), Fraction(1, 4), TENTH])
@pytest.mark.parametrize("seed", range(10))
def test_random_trees_are_certified(n: int, epsilon: Fraction, seed: int) -> None:
    game, plan, tree = _setup(gen_random_tree_polymatrix(n, 2, seed=1000 * n + seed), epsilon)
    result = solve_polymatrix_tree(game, tree, plan, epsilon)
    assert result.report.max_regret <= epsilon


@pytest.mark.slow
@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("seed", range(5))
def test_random_three_action_trees_are_certified(n: int, seed: int) -> None:
    epsilon = Fraction(1, 2)
    game, plan, tree = _setup(gen_random_tree_polymatrix(n, 3, seed=seed), epsilon)
    assert solve_polymatrix_tree(game, tree, plan, epsilon).verified


@pytest.mark.slow
@pytest.mark.parametrize("n", [2, 3, 4, 5])
@pytest.mark.parametrize("seed", range(3))
def test_three_action_trees_at_a_quarter(n: int, seed: int) -> None:
    epsilon = Fraction(1, 4)
    game, plan, tree = _setup(gen_random_tree_polymatrix(n, 3, seed=500 * n + seed), epsilon)
    result = solve_polymatrix_tree(game, tree, plan, epsilon)
    assert result.report.max_regret <= epsilon
    assert result.verified


@pytest.mark.slow
@pytest.mark.parametrize("seed", [0, 1])
def test_three_action_path_at_a_tenth(seed: int) -> None:
    game, plan, tree = _setup(gen_random_tree_polymatrix(3, 3, seed=seed, shape="path"), TENTH)
    result = solve_polymatrix_tree(game, tree, plan, TENTH)
    assert result.report.max_regret <= TENTH
    assert result.verified


@pytest.mark.slow
def test_large_star_is_certified() -> None:
    game, plan, tree = _setup(gen_star_matching_pennies(101), TENTH)
    result = solve_polymatrix_tree(game, tree, plan, TENTH)
    assert result.verified
    assert result.strategies[0].s == 120
