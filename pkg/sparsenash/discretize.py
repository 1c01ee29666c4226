"""
Discretization module for sparsenash
Probability grids, payoff lattices, grid sizing and exact projection
"""

import logging
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Any, Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import ClampWarning, EpsilonNonpositive, MalformedGame, UnnormalizedStrategy
from .game import GameDefinition, StructureStats, as_distribution, clique_stats, to_rational

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)


class Variant(str, Enum):
    SIMPLE = "simple"
    REFINED = "refined"


# ============ LATTICES ============

@dataclass(frozen=True)
class ProbabilityGrid:
    """Grid {0, 1/s, ..., 1}; points are integer numerators"""
    s: int

    def __post_init__(self):
        if self.s < 1:
            raise ValueError(f"grid denominator must be positive, got {self.s}")

    @property
    def tau(self) -> Fraction:
        return Fraction(1, self.s)

    @property
    def points(self) -> range:
        return range(self.s + 1)

    def value(self, k: int) -> Fraction:
        return Fraction(k, self.s)


@dataclass(frozen=True)
class PayoffLattice:
    """Integer multiples of tau between lo_index and hi_index"""
    tau: Fraction
    lo_index: int
    hi_index: int

    def value(self, k: int) -> Fraction:
        return k * self.tau

    @property
    def size(self) -> int:
        return self.hi_index - self.lo_index

    def contains(self, k: int) -> bool:
        return self.lo_index <= k <= self.hi_index


@dataclass(frozen=True)
class GridMixedStrategy:
    player: int
    numerators: Tuple[int, ...]
    s: int

    def __post_init__(self):
        numerators = tuple(int(k) for k in self.numerators)
        object.__setattr__(self, "numerators", numerators)
        if any(k < 0 for k in numerators) or sum(numerators) != self.s:
            raise UnnormalizedStrategy(
                f"player {self.player}: numerators {list(numerators)} do not sum to {self.s}"
            )

    @property
    def probabilities(self) -> Tuple[Fraction, ...]:
        return tuple(Fraction(k, self.s) for k in self.numerators)

    def __str__(self):
        return "(" + ", ".join(str(p) for p in self.probabilities) + ")"


GridStrategyProfile = Dict[int, GridMixedStrategy]


def profile_key(profile: Mapping[int, GridMixedStrategy]) -> Tuple[Tuple[int, ...], ...]:
    """Hashable numerator view of a grid profile"""
    return tuple(profile[i].numerators for i in sorted(profile))


@dataclass(frozen=True)
class DiscretizationPlan:
    epsilon: Fraction
    sizing_epsilon: Fraction
    variant: Variant
    grids: Mapping[int, ProbabilityGrid]
    lattices: Mapping[int, PayoffLattice]
    actions: Tuple[int, ...]
    indifferent: FrozenSet[int] = frozenset()
    clique_orders: Mapping[int, Tuple[int, ...]] = field(default_factory=dict)
    range_bound: Fraction = Fraction(0)
    span_bound: Fraction = Fraction(0)

    def s(self, i: int) -> int:
        return self.grids[i].s

    def summary(self) -> Dict[str, Any]:
        return {
            "variant": self.variant.value,
            "epsilon": str(self.epsilon),
            "sizing_epsilon": str(self.sizing_epsilon),
            "grid_denominators": {str(i): g.s for i, g in sorted(self.grids.items())},
        }


def positive_epsilon(epsilon: Any) -> Fraction:
    eps = to_rational(epsilon)
    if eps <= 0:
        raise EpsilonNonpositive(f"epsilon must be positive, got {eps}")
    return eps


# ============ SIZING ============

def _clique_weights(game: GameDefinition) -> List[Fraction]:
    """Σ_C R_{j,C}(|C| - 1) per player j"""
    return [
        sum((clique_stats(c).range * (c.size - 1) for c in game.cliques_of(j)), Fraction(0))
        for j in game.players
    ]


def admissible_epsilon(game: GameDefinition, stats: StructureStats) -> Optional[Fraction]:
    """Largest epsilon the sizing theorem admits, None when unconstrained"""
    weights = _clique_weights(game)
    bounds = [
        2 * weights[i] / (stats.kappa_prime_i[i] - 1)
        for i in game.players
        if stats.kappa_prime_i[i] >= 2 and weights[i] > 0
    ]
    return min(bounds) if bounds else None


def _sizing_epsilon(game: GameDefinition, stats: StructureStats, eps: Fraction) -> Fraction:
    bound = admissible_epsilon(game, stats)
    if bound is not None and eps > bound:
        logger.info(f"epsilon {eps} above admissible bound {bound}; sizing with {bound}")
        return bound
    return eps


def _probability_grids(game: GameDefinition, stats: StructureStats,
                       sizing: Fraction) -> Dict[int, ProbabilityGrid]:
    weights = _clique_weights(game)
    grids = {}
    for i in game.players:
        m = game.actions[i]
        worst = max((weights[j] for j in stats.affected[i]), default=Fraction(0))
        s = math.ceil(6 * m * worst / sizing) if worst > 0 else m
        grids[i] = ProbabilityGrid(s)
    return grids


def _bounds(game: GameDefinition) -> Tuple[Fraction, Fraction]:
    ranges, spans = [Fraction(0)], [Fraction(0)]
    for clique in game.cliques:
        stats = clique_stats(clique)
        ranges.append(stats.range)
        spans.append(max(stats.u, 0) - min(stats.l, 0))
    return max(ranges), max(spans)


def plan_simple(game: GameDefinition, stats: StructureStats, epsilon: Any) -> DiscretizationPlan:
    """Grids and lattices sized by the joint sparse-representation theorem"""
    eps = positive_epsilon(epsilon)
    sizing = _sizing_epsilon(game, stats, eps)
    grids = _probability_grids(game, stats, sizing)

    lattices = {}
    indifferent = set(game.indifferent)
    for i in game.players:
        cliques = game.cliques_of(i)
        if not cliques:
            lattices[i] = PayoffLattice(sizing / 3, 0, 0)
            indifferent.add(i)
            continue
        tau = sizing / (3 * len(cliques))
        lo = hi = 0
        for clique in cliques:
            c = clique_stats(clique)
            lo += math.floor(min(c.l, 0) / tau)
            hi += math.ceil(max(c.u, 0) / tau)
        lattices[i] = PayoffLattice(tau, lo, hi)
        if all(clique_stats(c).range == 0 for c in cliques):
            indifferent.add(i)

    range_bound, span_bound = _bounds(game)
    plan = DiscretizationPlan(
        epsilon=eps,
        sizing_epsilon=sizing,
        variant=Variant.SIMPLE,
        grids=grids,
        lattices=lattices,
        actions=game.actions,
        indifferent=frozenset(indifferent),
        clique_orders={i: tuple(game.clique_indices_of(i)) for i in game.players},
        range_bound=range_bound,
        span_bound=span_bound,
    )
    logger.debug(f"simple plan: s={[g.s for g in grids.values()]}")
    return plan


def plan_refined(game: GameDefinition, stats: StructureStats, epsilon: Any,
                 clique_orderings: Optional[Mapping[int, Sequence[int]]] = None) -> DiscretizationPlan:
    """Grids as in plan_simple; lattices on [0, 1] with range-weighted spacing"""
    eps = positive_epsilon(epsilon)
    sizing = _sizing_epsilon(game, stats, eps)
    grids = _probability_grids(game, stats, sizing)

    orders = {}
    lattices = {}
    indifferent = set(game.indifferent)
    for i in game.players:
        owned = game.clique_indices_of(i)
        order = tuple(clique_orderings[i]) if clique_orderings and i in clique_orderings else tuple(owned)
        if sorted(order) != sorted(owned):
            raise MalformedGame(f"clique ordering for {i} must be a permutation of {owned}")
        orders[i] = order
        kappa = len(order)
        weight = sum(
            (clique_stats(game.cliques[idx]).range * (game.cliques[idx].size + kappa - l)
             for l, idx in enumerate(order, start=1)),
            Fraction(0),
        )
        if weight == 0:
            lattices[i] = PayoffLattice(Fraction(1), 0, 1)
            indifferent.add(i)
            continue
        intervals = math.ceil(3 * weight / sizing)
        lattices[i] = PayoffLattice(Fraction(1, intervals), 0, intervals)

    range_bound, span_bound = _bounds(game)
    return DiscretizationPlan(
        epsilon=eps,
        sizing_epsilon=sizing,
        variant=Variant.REFINED,
        grids=grids,
        lattices=lattices,
        actions=game.actions,
        indifferent=frozenset(indifferent),
        clique_orders=orders,
        range_bound=range_bound,
        span_bound=span_bound,
    )


@dataclass(frozen=True)
class ClaimOneReport:
    probability_ratios: Dict[int, Fraction]
    payoff_ratios: Dict[int, Fraction]
    probability_constant: Fraction
    payoff_constant: Fraction
    holds: bool


def claim1_bounds(plan: DiscretizationPlan, stats: StructureStats,
                  range_bound: Optional[Any] = None) -> ClaimOneReport:
    """Measured s_i ε/(mκ'κ) and s'_i ε/κ² against the constants the formulas imply"""
    eps = plan.sizing_epsilon
    r = to_rational(range_bound) if range_bound is not None else plan.range_bound
    m = max(plan.actions)
    kappa, kappa_prime = stats.kappa, stats.kappa_prime
    probability_constant = 6 * r
    if plan.variant is Variant.SIMPLE:
        payoff_constant = 3 * plan.span_bound
    else:
        payoff_constant = 3 * r * (kappa_prime + kappa) / max(kappa, 1)
    if kappa == 0:
        return ClaimOneReport({}, {}, probability_constant, payoff_constant, True)

    scale = m * kappa_prime * kappa
    probability_ratios, payoff_ratios = {}, {}
    holds = True
    for i, grid in plan.grids.items():
        probability_ratios[i] = grid.s * eps / scale
        if grid.s > math.ceil(probability_constant * scale / eps) and grid.s > m:
            holds = False
        lattice = plan.lattices[i]
        payoff_ratios[i] = lattice.size * eps / kappa ** 2
        if plan.variant is Variant.SIMPLE:
            allowance = 2 * kappa * eps
        else:
            allowance = eps
        if lattice.size * eps > payoff_constant * kappa ** 2 + allowance:
            holds = False
    return ClaimOneReport(probability_ratios, payoff_ratios, probability_constant, payoff_constant, holds)


# ============ PROJECTION AND ENUMERATION ============

def project(v: Any, lattice: PayoffLattice, warn: bool = True) -> int:
    """Index of the nearest lattice point; exact halves go to the larger value"""
    k = math.floor(to_rational(v) / lattice.tau + HALF)
    if k < lattice.lo_index or k > lattice.hi_index:
        clamped = min(max(k, lattice.lo_index), lattice.hi_index)
        if warn:
            message = f"value {v} outside lattice [{lattice.lo_index}, {lattice.hi_index}]·{lattice.tau}; clamped"
            logger.warning(message)
            warnings.warn(message, ClampWarning, stacklevel=2)
        return clamped
    return k


@lru_cache(maxsize=256)
def grid_numerators(m: int, s: int) -> np.ndarray:
    """All compositions of s into m parts, lexicographic, one row each"""
    if m < 1 or s < 1:
        raise ValueError(f"need m >= 1 and s >= 1, got m={m}, s={s}")
    rows = []
    for bars in combinations(range(s + m - 1), m - 1):
        edges = (-1,) + bars + (s + m - 1,)
        rows.append([edges[t + 1] - edges[t] - 1 for t in range(m)])
    table = np.array(rows, dtype=np.int64).reshape(-1, m)
    table.setflags(write=False)
    return table


def enumerate_grid_strategies(m: int, s: int, player: int = 0) -> List[GridMixedStrategy]:
    return [GridMixedStrategy(player, tuple(row), s) for row in grid_numerators(m, s).tolist()]


def grid_count(m: int, s: int) -> int:
    return math.comb(s + m - 1, m - 1)


def round_to_grid(strategy: Any, s: int, player: int = 0) -> GridMixedStrategy:
    """ℓ∞-nearest grid strategy; ties favour larger leading coordinates"""
    p = as_distribution(strategy, len(getattr(strategy, "probabilities", strategy)))
    scaled = [q * s for q in p]
    candidates = {Fraction(0), Fraction(1)}
    for x in scaled:
        candidates.add(x - math.floor(x))
        candidates.add(math.ceil(x) - x)

    for delta in sorted(candidates):
        lo = [max(0, math.ceil(x - delta)) for x in scaled]
        hi = [min(s, math.floor(x + delta)) for x in scaled]
        if all(a <= b for a, b in zip(lo, hi)) and sum(lo) <= s <= sum(hi):
            break

    numerators, remaining = [], s
    for a in range(len(scaled)):
        take = min(hi[a], remaining - sum(lo[a + 1:]))
        numerators.append(take)
        remaining -= take
    return GridMixedStrategy(player, tuple(numerators), s)
