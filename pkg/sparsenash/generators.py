"""
Instance generators for sparsenash
Matching-pennies stars, seeded random trees and the fixed example games
"""

import logging
import math
from fractions import Fraction
from typing import Any, List, Sequence, Tuple

import networkx as nx
import numpy as np

from .errors import ParameterOutOfRange
from .game import GameDefinition, LocalClique, to_rational

logger = logging.getLogger(__name__)

ORIENTATIONS = ("split", "center-matches", "leaves-match")
SHAPES = ("random", "path")


def _require(condition: bool, message: str):
    if not condition:
        raise ParameterOutOfRange(message)


# ============ MATCHING PENNIES ============

def _pennies(matcher: bool, reward: Tuple[Fraction, Fraction]) -> np.ndarray:
    """Row player's 2x2 table; the matcher wins on equal actions"""
    win, lose = reward
    same, different = (win, lose) if matcher else (lose, win)
    return np.array([[same, different], [different, same]], dtype=object)


def center_matches(orientation: str, leaf: int, leaves: int) -> bool:
    if orientation == "center-matches":
        return True
    if orientation == "leaves-match":
        return False
    return leaf <= math.ceil(leaves / 2)


def gen_star_matching_pennies(n: int, orientation: str = "split",
                              reward: Sequence[Any] = (1, 0)) -> GameDefinition:
    """Star with center 0; every edge plays matching pennies"""
    _require(n >= 2, f"a star needs at least 2 players, got {n}")
    _require(orientation in ORIENTATIONS, f"orientation must be one of {ORIENTATIONS}")
    pair = (to_rational(reward[0]), to_rational(reward[1]))
    leaves = n - 1
    cliques: List[LocalClique] = []
    for leaf in range(1, n):
        center_is_matcher = center_matches(orientation, leaf, leaves)
        cliques.append(LocalClique(0, (0, leaf), _pennies(center_is_matcher, pair)))
        cliques.append(LocalClique(leaf, (leaf, 0), _pennies(not center_is_matcher, pair)))
    metadata = {
        "name": f"star-mp-{n}",
        "generator": "star-mp",
        "orientation": orientation,
        "reward": [str(pair[0]), str(pair[1])],
    }
    return GameDefinition((2,) * n, tuple(cliques), metadata=metadata)


# ============ RANDOM TREES ============

def tree_edges(n: int, rng: np.random.Generator, shape: str = "random") -> List[Tuple[int, int]]:
    """Uniform labeled tree from a Prüfer sequence, or the path 0-1-...-(n-1)"""
    _require(shape in SHAPES, f"shape must be one of {SHAPES}")
    if n < 2:
        return []
    if shape == "path" or n == 2:
        return [(i, i + 1) for i in range(n - 1)]
    sequence = [int(x) for x in rng.integers(0, n, size=n - 2)]
    tree = nx.from_prufer_sequence(sequence)
    return sorted(tuple(sorted(edge)) for edge in tree.edges())


def _grid_values(rng: np.random.Generator, shape: Tuple[int, ...], payoff_range: Sequence[Any],
                 grid: int) -> np.ndarray:
    lo, hi = to_rational(payoff_range[0]), to_rational(payoff_range[1])
    steps = rng.integers(0, grid + 1, size=shape)
    values = [lo + (hi - lo) * Fraction(int(k), grid) for k in steps.flat]
    return np.array(values, dtype=object).reshape(shape)


def _check_random(n: int, m: int, payoff_range: Sequence[Any], grid: int):
    _require(n >= 1, f"need at least one player, got {n}")
    _require(m >= 2, f"need at least two actions, got {m}")
    _require(grid >= 1, f"payoff grid must be positive, got {grid}")
    _require(to_rational(payoff_range[0]) < to_rational(payoff_range[1]), "payoff range must be increasing")


def gen_random_tree_polymatrix(n: int, m: int, seed: int, payoff_range: Sequence[Any] = (0, 1),
                               grid: int = 10, shape: str = "random") -> GameDefinition:
    """Random tree; each edge carries one m×m matrix per endpoint"""
    _check_random(n, m, payoff_range, grid)
    rng = np.random.default_rng(seed)
    cliques: List[LocalClique] = []
    for u, v in tree_edges(n, rng, shape):
        cliques.append(LocalClique(u, (u, v), _grid_values(rng, (m, m), payoff_range, grid)))
        cliques.append(LocalClique(v, (v, u), _grid_values(rng, (m, m), payoff_range, grid)))
    metadata = {"name": f"random-tree-{n}x{m}", "generator": "random-tree", "kind": "polymatrix",
                "shape": shape, "seed": seed}
    logger.debug(f"random polymatrix tree: n={n}, m={m}, seed={seed}, {len(cliques)} cliques")
    return GameDefinition((m,) * n, tuple(cliques), metadata=metadata)


def gen_random_tree_normalform(n: int, m: int, seed: int, payoff_range: Sequence[Any] = (0, 1),
                               grid: int = 10, shape: str = "random") -> GameDefinition:
    """Random tree graphical game; each player owns one table over its closed neighbourhood"""
    _check_random(n, m, payoff_range, grid)
    rng = np.random.default_rng(seed)
    neighbours = {i: [] for i in range(n)}
    for u, v in tree_edges(n, rng, shape):
        neighbours[u].append(v)
        neighbours[v].append(u)
    cliques = []
    for i in range(n):
        members = (i,) + tuple(sorted(neighbours[i]))
        cliques.append(LocalClique(i, members, _grid_values(rng, (m,) * len(members), payoff_range, grid)))
    metadata = {"name": f"random-tree-{n}x{m}", "generator": "random-tree", "kind": "normalform",
                "shape": shape, "seed": seed}
    return GameDefinition((m,) * n, tuple(cliques), metadata=metadata)


# ============ FIXED EXAMPLES ============

def gen_example_player1(b: Any = 1, c: Any = 1, gamma: Any = Fraction(1, 10)) -> GameDefinition:
    """Player 0 against neighbours 1, 2, 3 with payoffs that no [0, d] rescaling preserves"""
    b, c, gamma = to_rational(b), to_rational(c), to_rational(gamma)
    _require(b > 0 and c > 0, f"b and c must be positive, got b={b}, c={c}")
    _require(0 < gamma < Fraction(1, 3), f"gamma must lie in (0, 1/3), got {gamma}")
    first = np.array([[1 + 2 * b, 1 + 2 * b - gamma], [-2 * c + gamma, -2 * c]], dtype=object)
    other = np.array([[-b, -b - gamma], [c + gamma, c]], dtype=object)
    zero = np.full((2, 2), Fraction(0), dtype=object)
    cliques = [
        LocalClique(0, (0, 1), first),
        LocalClique(0, (0, 2), other),
        LocalClique(0, (0, 3), other),
    ]
    cliques += [LocalClique(j, (j, 0), zero) for j in (1, 2, 3)]
    metadata = {"name": "example-player1", "generator": "example1",
                "b": str(b), "c": str(c), "gamma": str(gamma)}
    return GameDefinition((2, 2, 2, 2), tuple(cliques), metadata=metadata)


MIXED_CLIQUES = (
    (0, 1),
    (1, 4),
    (2, 4),
    (3, 0),
    (3, 4),
    (4, 0),
    (4, 1, 2),
)


def gen_mixed_clique_game(seed: int, m: int = 2, grid: int = 10) -> GameDefinition:
    """Five players with mixed clique sizes and asymmetric hyperedges, seeded payoffs"""
    _require(m >= 1, f"need at least one action, got {m}")
    rng = np.random.default_rng(seed)
    cliques = [
        LocalClique(members[0], members, _grid_values(rng, (m,) * len(members), (0, 1), grid))
        for members in MIXED_CLIQUES
    ]
    metadata = {"name": "mixed-cliques", "generator": "mixed-cliques", "seed": seed}
    return GameDefinition((m,) * 5, tuple(cliques), metadata=metadata)
