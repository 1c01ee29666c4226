"""
sparsenash: sparse discretization and tree dynamic programming for
approximate Nash equilibria of graphical multi-hypermatrix games
"""

from .csp import build_csp, check_assignment, round_msne_to_assignment, solve_backtracking
from .discretize import GridMixedStrategy, Variant, plan_refined, plan_simple, project
from .dp import solve_normalform_tree, solve_polymatrix_tree
from .errors import SparseNashError
from .game import GameDefinition, LocalClique, normalize, root_tree, validate_game
from .verify import exact_regret, is_eps_msne

__version__ = "1.0.0"

__all__ = [
    "GameDefinition",
    "GridMixedStrategy",
    "LocalClique",
    "SparseNashError",
    "Variant",
    "build_csp",
    "check_assignment",
    "exact_regret",
    "is_eps_msne",
    "normalize",
    "plan_refined",
    "plan_simple",
    "project",
    "root_tree",
    "round_msne_to_assignment",
    "solve_backtracking",
    "solve_normalform_tree",
    "solve_polymatrix_tree",
    "validate_game",
]
