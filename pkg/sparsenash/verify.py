"""
Verification module for sparsenash
Exact regret certificates and brute-force grid oracles, independent of
the solvers
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import config
from .discretize import (
    DiscretizationPlan,
    GridMixedStrategy,
    GridStrategyProfile,
    grid_count,
    grid_numerators,
    to_rational,
)
from .errors import DimensionMismatch, TooLarge
from .game import GameDefinition, as_distribution, exact_expected_clique_payoff

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RegretReport:
    regrets: Dict[int, Fraction]
    epsilon: Fraction

    @property
    def verdicts(self) -> Dict[int, bool]:
        return {i: r <= self.epsilon for i, r in self.regrets.items()}

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    @property
    def max_regret(self) -> Fraction:
        return max(self.regrets.values(), default=Fraction(0))

    def lines(self) -> List[str]:
        """Human-readable per-player listing"""
        return [
            f"player {i}: regret {r} ({float(r):.6g}) {'ok' if r <= self.epsilon else 'FAIL'}"
            for i, r in sorted(self.regrets.items())
        ]


def _distributions(game: GameDefinition, profile: Mapping[int, Any]) -> Dict[int, np.ndarray]:
    if set(profile) != set(game.players):
        raise DimensionMismatch(f"profile covers players {sorted(profile)}, game has {game.n}")
    return {i: as_distribution(profile[i], game.actions[i]) for i in game.players}


def action_payoffs(game: GameDefinition, i: int, distributions: Mapping[int, Any]) -> List[Fraction]:
    """Exact M'_i(a_i, p_{N_i - i}) for every action a_i"""
    payoffs = []
    for a in range(game.actions[i]):
        total = Fraction(0)
        for clique in game.cliques_of(i):
            others = {j: distributions[j] for j in clique.members[1:]}
            total += exact_expected_clique_payoff(clique, {i: a}, others)
        payoffs.append(total)
    return payoffs


def _regret(payoffs: Sequence[Fraction], p: Sequence[Fraction]) -> Fraction:
    expected = sum((q * v for q, v in zip(p, payoffs)), Fraction(0))
    return max(payoffs) - expected


def exact_regret(game: GameDefinition, profile: Mapping[int, Any], epsilon: Any = 0) -> RegretReport:
    """Per-player best pure-deviation gain, in exact arithmetic"""
    distributions = _distributions(game, profile)
    regrets = {
        i: _regret(action_payoffs(game, i, distributions), distributions[i])
        for i in game.players
    }
    return RegretReport(regrets=regrets, epsilon=to_rational(epsilon))


def is_eps_msne(game: GameDefinition, profile: Mapping[int, Any], epsilon: Any) -> bool:
    return exact_regret(game, profile, epsilon).passed


# ============ GRID ORACLES ============

class _GridScanner:
    """Regrets over joint grid profiles, memoized per clique and per player"""

    def __init__(self, game: GameDefinition, denominators: Mapping[int, int]):
        self.game = game
        self.denominators = dict(denominators)
        self.grids = {i: grid_numerators(game.actions[i], self.denominators[i]) for i in game.players}
        self.owned = {i: game.clique_indices_of(i) for i in game.players}
        self.hood = {
            i: tuple(sorted({m for idx in self.owned[i] for m in game.cliques[idx].members} - {i}))
            for i in game.players
        }
        self._clique_memo: Dict[tuple, List[Fraction]] = {}
        self._regret_memo: Dict[tuple, Fraction] = {}

    def count(self) -> int:
        return math.prod(len(g) for g in self.grids.values())

    def distribution(self, i: int, g: int) -> List[Fraction]:
        s = self.denominators[i]
        return [Fraction(int(k), s) for k in self.grids[i][g]]

    def _clique_vector(self, idx: int, indices: Sequence[int]) -> List[Fraction]:
        clique = self.game.cliques[idx]
        key = (idx,) + tuple(indices[j] for j in clique.members[1:])
        if key not in self._clique_memo:
            others = {j: self.distribution(j, indices[j]) for j in clique.members[1:]}
            self._clique_memo[key] = [
                exact_expected_clique_payoff(clique, {clique.owner: a}, others)
                for a in range(self.game.actions[clique.owner])
            ]
        return self._clique_memo[key]

    def regret(self, i: int, indices: Sequence[int]) -> Fraction:
        key = (i, indices[i]) + tuple(indices[j] for j in self.hood[i])
        if key not in self._regret_memo:
            payoffs = [Fraction(0)] * self.game.actions[i]
            for idx in self.owned[i]:
                payoffs = [x + y for x, y in zip(payoffs, self._clique_vector(idx, indices))]
            self._regret_memo[key] = _regret(payoffs, self.distribution(i, indices[i]))
        return self._regret_memo[key]

    def profiles(self):
        return product(*[range(len(self.grids[i])) for i in self.game.players])

    def to_profile(self, indices: Sequence[int]) -> GridStrategyProfile:
        return {
            i: GridMixedStrategy(i, tuple(int(k) for k in self.grids[i][g]), self.denominators[i])
            for i, g in enumerate(indices)
        }


def _scanner(game: GameDefinition, denominators: Mapping[int, int], cap: Optional[int]) -> _GridScanner:
    cap = cap if cap is not None else config.BRUTE_FORCE_CAP
    estimated = math.prod(grid_count(game.actions[i], denominators[i]) for i in game.players)
    if estimated > cap:
        raise TooLarge(estimated, cap)
    return _GridScanner(game, denominators)


def brute_force_grid_equilibria(game: GameDefinition, plan: DiscretizationPlan, epsilon: Any,
                                cap: Optional[int] = None) -> List[GridStrategyProfile]:
    """Every joint grid profile whose exact regret is within epsilon"""
    eps = to_rational(epsilon)
    scanner = _scanner(game, {i: plan.s(i) for i in game.players}, cap)
    found = []
    for indices in scanner.profiles():
        if all(scanner.regret(i, indices) <= eps for i in game.players):
            found.append(scanner.to_profile(indices))
    logger.info(f"brute force: {len(found)} of {scanner.count()} grid profiles within {eps}")
    return found


def fine_grid_equilibrium(game: GameDefinition, s: int,
                          cap: Optional[int] = None) -> Tuple[GridStrategyProfile, Fraction]:
    """Minimum-regret profile on the uniform grid of denominator s"""
    scanner = _scanner(game, {i: s for i in game.players}, cap)
    best, best_regret = None, None
    for indices in scanner.profiles():
        worst = max(scanner.regret(i, indices) for i in game.players)
        if best_regret is None or worst < best_regret:
            best, best_regret = indices, worst
            if worst == 0:
                break
    return scanner.to_profile(best), best_regret
