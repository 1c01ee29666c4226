"""
Error types for sparsenash
Every error carries the CLI exit code it maps to
"""

from typing import Optional


class SparseNashError(Exception):
    """Base class for all sparsenash errors"""
    exit_code = 2


# ============ INPUT ERRORS ============

class MalformedGame(SparseNashError):
    """A game violates a structural invariant"""


class NotPolymatrix(SparseNashError):
    """Operation needs a polymatrix game"""


class NotATree(SparseNashError):
    """Interaction graph has a cycle"""


class UnnormalizedStrategy(SparseNashError):
    """Mixed strategy does not sum to one"""


class EpsilonNonpositive(SparseNashError):
    """Approximation target must be positive"""


class PlanMismatch(SparseNashError):
    """Plan, variant or CSP document disagree"""


class DimensionMismatch(SparseNashError):
    """Profile does not fit the game"""


class ParameterOutOfRange(SparseNashError):
    """Generator parameter outside its admissible range"""


class SchemaError(SparseNashError):
    """Document does not match its JSON schema"""

    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


# ============ SOLVER ERRORS ============

class CertificationFailed(SparseNashError):
    """Solver output failed its exact regret check"""
    exit_code = 1


class InfeasibleAtRoot(SparseNashError):
    """No root strategy survived the collection pass"""
    exit_code = 3

    def __init__(self, root: int, diagnostics: Optional[dict] = None):
        self.root = root
        self.diagnostics = diagnostics or {}
        super().__init__(f"no feasible strategy at root {root}: {self.diagnostics}")


class TooLarge(SparseNashError):
    """Exhaustive enumeration would exceed its cap"""
    exit_code = 4

    def __init__(self, estimated: int, cap: int):
        self.estimated = estimated
        self.cap = cap
        super().__init__(f"{estimated} profiles exceed cap {cap}")


class NodeLimitExceeded(SparseNashError):
    """Backtracking search hit its node limit"""
    exit_code = 4


# ============ WARNINGS ============

class DegeneratePlayer(UserWarning):
    """Player payoff is constant; matrices zeroed and player flagged"""


class ClampWarning(UserWarning):
    """Value projected outside the payoff lattice was clamped"""
