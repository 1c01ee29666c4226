"""
Tree solvers for sparsenash
"""

from .normalform import NormalFormTreeDP, solve_normalform_tree
from .polymatrix import (
    SLACK_MODES,
    PolymatrixTreeDP,
    collect_messages,
    dp_feasible_profiles,
    reachable_partial_sums,
    slack_value,
    solve_polymatrix_tree,
)
from .tables import EquilibriumProfile, FeasibilityTable, MessageTables, SumsetMask, WitnessTable

__all__ = [
    "SLACK_MODES",
    "EquilibriumProfile",
    "FeasibilityTable",
    "MessageTables",
    "NormalFormTreeDP",
    "PolymatrixTreeDP",
    "SumsetMask",
    "WitnessTable",
    "collect_messages",
    "dp_feasible_profiles",
    "reachable_partial_sums",
    "slack_value",
    "solve_normalform_tree",
    "solve_polymatrix_tree",
]
