"""
Tree DP for polymatrix games
Two passes over a rooted tree: feasibility messages leaves to root, then
witness unwinding root to leaves. Partial sums are kept modulo the
all-ones vector, under which the best-response test is invariant.
"""

import logging
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple

import numpy as np
from scipy import signal

from ..discretize import (
    DiscretizationPlan,
    GridMixedStrategy,
    GridStrategyProfile,
    Variant,
    grid_numerators,
    positive_epsilon,
    project,
)
from ..errors import CertificationFailed, InfeasibleAtRoot, MalformedGame, NotATree, NotPolymatrix, PlanMismatch
from ..game import GameDefinition, GameKind, RootedTree, classify, validate_game
from ..verify import exact_regret
from .tables import EquilibriumProfile, FeasibilityTable, MessageTables, SumsetMask, WitnessTable

logger = logging.getLogger(__name__)

SLACK_MODES = ("proven", "literal")


def slack_value(plan: DiscretizationPlan, mode: str) -> Fraction:
    """Best-response slack: (2/3)ε as the CSP proves it, or the bare ε"""
    if mode == "proven":
        return Fraction(2, 3) * plan.sizing_epsilon
    if mode == "literal":
        return plan.sizing_epsilon
    raise ValueError(f"unknown slack mode {mode!r}, expected one of {SLACK_MODES}")


def uniform_index(grid: np.ndarray, s: int) -> Optional[int]:
    m = grid.shape[1]
    if s % m:
        return None
    hits = np.flatnonzero((grid == s // m).all(axis=1))
    return int(hits[0]) if len(hits) else None


def check_tree(game: GameDefinition, tree: RootedTree):
    """Every player is on the tree and every clique lies along a tree edge"""
    if sorted(tree.parent) != list(game.players):
        raise MalformedGame(f"tree spans {sorted(tree.parent)}, game has players 0..{game.n - 1}")
    for clique in game.cliques:
        for member in clique.members[1:]:
            if tree.parent.get(member) != clique.owner and tree.parent.get(clique.owner) != member:
                raise NotATree(f"clique {list(clique.members)} is not along a tree edge")


@dataclass
class _Node:
    player: int
    s: int
    grid: np.ndarray
    parent: Optional[int]
    children: Tuple[int, ...]
    bound: int
    towards_parent: np.ndarray
    from_children: Dict[int, np.ndarray]
    preferred: Optional[int]

    @property
    def m(self) -> int:
        return self.grid.shape[1]

    @property
    def dim(self) -> int:
        return max(self.m - 1, 1)

    def reduce(self, values: np.ndarray) -> np.ndarray:
        """Full action vectors to differences against action 0"""
        if self.m == 1:
            return np.zeros(values.shape[:-1] + (1,), dtype=np.int64)
        return values[..., 1:] - values[..., :1]

    def expand(self, quotient: np.ndarray) -> np.ndarray:
        zeros = np.zeros(quotient.shape[:-1] + (1,), dtype=np.int64)
        return np.concatenate([zeros, quotient], axis=-1)[..., :self.m]

    def best_response_ok(self, quotient: np.ndarray, g: int) -> np.ndarray:
        """s·X(a) - Σ n·X <= bound for every action, in lattice units"""
        full = self.expand(quotient)
        mixed = full @ self.grid[g]
        return (self.s * full - mixed[..., None]).max(axis=-1) <= self.bound

    def ordered(self, candidates: Sequence[int]) -> List[int]:
        candidates = [int(g) for g in candidates]
        if self.preferred is not None and self.preferred in candidates:
            candidates.remove(self.preferred)
            candidates.insert(0, self.preferred)
        return candidates


class PolymatrixTreeDP:
    """Collection and assignment passes for one game, tree and plan"""

    def __init__(self, game: GameDefinition, tree: RootedTree, plan: DiscretizationPlan, slack: str = "proven"):
        if classify(game) is not GameKind.POLYMATRIX:
            raise NotPolymatrix("solve_polymatrix_tree needs two-member cliques")
        if plan.variant is not Variant.SIMPLE:
            raise PlanMismatch("polymatrix DP runs on a simple plan")
        self.stats = validate_game(game)
        check_tree(game, tree)
        self.game = game
        self.tree = tree
        self.plan = plan
        self.slack = slack
        self.slack_amount = slack_value(plan, slack)
        self.nodes = {i: self._node(i) for i in game.players}
        self._arcs: Dict[int, FeasibilityTable] = {}
        self.tables: Optional[MessageTables] = None
        self.full_root = False
        self.witnesses = WitnessTable()

    # --- setup ---

    def _edge_indices(self, i: int, j: int) -> np.ndarray:
        """Lattice indices of M̃_{i,j}(a_i, p_j), one row per grid strategy of j"""
        grid_j = grid_numerators(self.game.actions[j], self.plan.s(j))
        values = np.zeros((len(grid_j), self.game.actions[i]), dtype=np.int64)
        lattice = self.plan.lattices[i]
        s_j = self.plan.s(j)
        for clique in self.game.cliques_of(i):
            if clique.members != (i, j):
                continue
            expected = clique.payoffs.dot(grid_j.T.astype(object))
            for a, row in enumerate(expected):
                values[:, a] += [project(Fraction(v, s_j), lattice) for v in row]
        return values

    def _node(self, i: int) -> _Node:
        s = self.plan.s(i)
        grid = grid_numerators(self.game.actions[i], s)
        parent = self.tree.parent[i]
        towards_parent = (self._edge_indices(i, parent) if parent is not None
                          else np.zeros((1, self.game.actions[i]), dtype=np.int64))
        owned = self.stats.kappa_i[i]
        bound = math.floor(s * self.slack_amount / self.plan.lattices[i].tau) if owned else 0
        isolated = not self.stats.affected[i] and (owned == 0 or i in self.plan.indifferent)
        return _Node(
            player=i,
            s=s,
            grid=grid,
            parent=parent,
            children=tuple(self.tree.children[i]),
            bound=bound,
            towards_parent=towards_parent,
            from_children={c: self._edge_indices(i, c) for c in self.tree.children[i]},
            preferred=uniform_index(grid, s) if isolated else None,
        )

    # --- collection pass ---

    def chain(self, i: int, g: int) -> List[SumsetMask]:
        """Reachable reduced partial sums after each child, for p_i = grid row g"""
        node = self.nodes[i]
        masks = [SumsetMask.zero(node.dim)]
        for c in node.children:
            feasible = self._arcs[c].choices(g)
            if not len(feasible):
                masks.append(SumsetMask.empty(node.dim))
                continue
            deltas = np.unique(node.reduce(node.from_children[c][feasible]), axis=0)
            masks.append(masks[-1].minkowski(deltas))
        return masks

    def _arc_row(self, node: _Node, g: int, final: SumsetMask) -> np.ndarray:
        """T_{i→pa(i)}(p_i, ·) from the final partial-sum set"""
        deltas = node.reduce(node.towards_parent)
        if final.is_empty:
            return np.zeros(len(deltas), dtype=bool)
        lo, hi = deltas.min(axis=0), deltas.max(axis=0)
        shape = tuple(np.array(final.mask.shape) + hi - lo)
        coords = np.indices(shape).reshape(node.dim, -1).T + final.origin + lo
        ok = node.best_response_ok(coords, g).reshape(shape)
        counts = signal.convolve(ok.astype(np.int64), np.flip(final.mask).astype(np.int64), mode="valid")
        return (counts > 0)[tuple((deltas - lo).T)]

    def collect(self, full_root: bool = False) -> MessageTables:
        root = self.tree.root
        sum_bytes = 0
        self._arcs = {}
        for i in self.tree.postorder():
            if i == root:
                continue
            node = self.nodes[i]
            rows = []
            for g in range(len(node.grid)):
                final = self.chain(i, g)[-1]
                sum_bytes += final.nbytes
                rows.append(np.flatnonzero(self._arc_row(node, g, final)))
            table = FeasibilityTable.from_rows(i, node.parent, rows, len(node.towards_parent))
            self._arcs[i] = table
            logger.debug(f"arc {i}->{node.parent}: {table.count} of {len(rows) * table.shape[1]} pairs feasible")

        node = self.nodes[root]
        feasible = []
        for g in node.ordered(range(len(node.grid))):
            final = self.chain(root, g)[-1]
            sum_bytes += final.nbytes
            if not final.is_empty and node.best_response_ok(final.points(), g).any():
                feasible.append(g)
                if not full_root:
                    break
        root_table = FeasibilityTable.root_table(root, feasible, len(node.grid))
        self.tables = MessageTables(self._arcs, root_table, sum_bytes)
        self.full_root = full_root
        logger.info(f"collection pass done: {self.tables.table_bytes} table bytes")
        return self.tables

    # --- assignment pass ---

    def _diagnostics(self) -> dict:
        return {
            "root": self.tree.root,
            "grid_denominators": {i: n.s for i, n in self.nodes.items()},
            "bounds": {i: n.bound for i, n in self.nodes.items()},
            "slack": self.slack,
        }

    def _shift(self, node: _Node, choice: Dict[int, int]) -> np.ndarray:
        if node.parent is None:
            return np.zeros(node.dim, dtype=np.int64)
        return node.reduce(node.towards_parent[choice[node.parent]])

    def assign(self) -> Dict[int, int]:
        """Grid index per player, unwinding the lexicographically smallest witnesses"""
        if self.tables is None:
            self.collect()
        root = self.tree.root
        feasible = self.tables.root.choices()
        if not len(feasible):
            raise InfeasibleAtRoot(root, self._diagnostics())
        choice = {root: self.nodes[root].ordered(feasible)[0]}
        logger.info(f"root {root} strategy {self.nodes[root].grid[choice[root]].tolist()}/{self.nodes[root].s}")

        for i in self.tree.order():
            node = self.nodes[i]
            g = choice[i]
            masks = self.chain(i, g)
            points = masks[-1].points()
            hits = np.flatnonzero(node.best_response_ok(points + self._shift(node, choice), g))
            if not len(hits):
                raise InfeasibleAtRoot(root, dict(self._diagnostics(), player=i))
            d = points[hits[0]]
            for level in reversed(range(len(node.children))):
                c = node.children[level]
                deltas = node.reduce(node.from_children[c])
                for gc in self.nodes[c].ordered(self._arcs[c].choices(g)):
                    if masks[level].contains(d - deltas[gc]):
                        self.witnesses.record((i, level + 1, tuple(int(x) for x in d)),
                                              (gc, tuple(int(x) for x in d - deltas[gc])))
                        choice[c] = gc
                        d = d - deltas[gc]
                        break
                else:
                    raise InfeasibleAtRoot(root, dict(self._diagnostics(), player=c))
        return choice

    def partial_sums(self, choice: Dict[int, int]) -> Dict[int, Tuple[int, ...]]:
        """Final S*_i over every edge of i, parent edge included, in lattice indices"""
        sums = {}
        for i, node in self.nodes.items():
            total = np.zeros(node.m, dtype=np.int64)
            for c in node.children:
                total = total + node.from_children[c][choice[c]]
            if node.parent is not None:
                total = total + node.towards_parent[choice[node.parent]]
            sums[i] = tuple(int(x) for x in total)
        return sums

    def strategies(self, choice: Dict[int, int]) -> GridStrategyProfile:
        return {
            i: GridMixedStrategy(i, tuple(int(k) for k in node.grid[choice[i]]), node.s)
            for i, node in sorted(self.nodes.items())
        }

    # --- exhaustive views ---

    def index_of(self, i: int, strategy) -> int:
        numerators = np.asarray(getattr(strategy, "numerators", strategy), dtype=np.int64)
        hits = np.flatnonzero((self.nodes[i].grid == numerators).all(axis=1))
        if not len(hits):
            raise MalformedGame(f"{numerators.tolist()} is not on player {i}'s grid")
        return int(hits[0])

    def _subtree(self, i: int, g: int, choice: Dict[int, int]) -> Iterator[Dict[int, int]]:
        node = self.nodes[i]
        shift = self._shift(node, choice)
        options = [self._arcs[c].choices(g) for c in node.children]
        for combo in product(*options):
            d = shift.copy()
            for c, gc in zip(node.children, combo):
                d = d + node.reduce(node.from_children[c][gc])
            if not node.best_response_ok(d[None, :], g)[0]:
                continue
            local = dict(choice)
            local[i] = g
            parts = [list(self._subtree(c, int(gc), local)) for c, gc in zip(node.children, combo)]
            for pieces in product(*parts):
                merged = {i: g}
                for piece in pieces:
                    merged.update(piece)
                yield merged

    def feasible_profiles(self) -> List[GridStrategyProfile]:
        if self.tables is None or not self.full_root:
            self.collect(full_root=True)
        root = self.tree.root
        profiles = []
        for g in self.tables.root.choices():
            for choice in self._subtree(root, int(g), {}):
                profiles.append(self.strategies(choice))
        return profiles


def collect_messages(game: GameDefinition, tree: RootedTree, plan: DiscretizationPlan,
                     slack: str = "proven") -> MessageTables:
    """Collection pass only, with every root strategy evaluated"""
    return PolymatrixTreeDP(game, tree, plan, slack).collect(full_root=True)


def dp_feasible_profiles(game: GameDefinition, tree: RootedTree, plan: DiscretizationPlan,
                         slack: str = "proven") -> List[GridStrategyProfile]:
    """Every grid profile the DP accepts, unwound over all witnesses"""
    dp = PolymatrixTreeDP(game, tree, plan, slack)
    dp.collect(full_root=True)
    return dp.feasible_profiles()


def reachable_partial_sums(dp: PolymatrixTreeDP, node: int, strategy,
                           prefix: Optional[int] = None) -> Set[Tuple[int, ...]]:
    """S vectors reachable after the first `prefix` children, normalized so S(0) = 0"""
    if dp.tables is None:
        dp.collect()
    g = strategy if isinstance(strategy, (int, np.integer)) else dp.index_of(node, strategy)
    masks = dp.chain(node, int(g))
    mask = masks[len(masks) - 1 if prefix is None else prefix]
    m = dp.nodes[node].m
    return {(0,) + tuple(int(x) for x in point)[:m - 1] for point in mask.points()}


def solve_polymatrix_tree(game: GameDefinition, tree: RootedTree, plan: DiscretizationPlan,
                          epsilon, slack: str = "proven") -> EquilibriumProfile:
    """ε-MSNE of a tree polymatrix game, certified with exact regrets"""
    eps = positive_epsilon(epsilon)
    if eps != plan.epsilon:
        raise PlanMismatch(f"plan sized for epsilon {plan.epsilon}, requested {eps}")
    started = time.perf_counter()
    dp = PolymatrixTreeDP(game, tree, plan, slack)
    tables = dp.collect()
    choice = dp.assign()
    strategies = dp.strategies(choice)
    report = exact_regret(game, strategies, eps)
    elapsed = time.perf_counter() - started
    logger.info(f"polymatrix DP: max regret {float(report.max_regret):.6g} (epsilon {eps}) in {elapsed:.3f}s")
    if not report.passed and slack == "proven":
        raise CertificationFailed(f"max regret {report.max_regret} exceeds {eps}: {report.lines()}")
    return EquilibriumProfile(
        strategies=strategies,
        epsilon=eps,
        plan=plan.summary(),
        root=tree.root,
        slack=slack,
        solver="polymatrix",
        partial_sums=dp.partial_sums(choice),
        report=report,
        stats={"seconds": elapsed, "table_bytes": tables.table_bytes},
    )
