"""
Tree DP for normal-form graphical games
Same two passes as the polymatrix solver with partial-expectation tables
in place of partial sums. Tables are stored shifted so their first entry
is zero; reachable tables are kept sparsely per (p_i, level).
"""

import logging
import math
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..discretize import (
    DiscretizationPlan,
    GridMixedStrategy,
    GridStrategyProfile,
    Variant,
    grid_numerators,
    positive_epsilon,
    project,
)
from ..errors import CertificationFailed, InfeasibleAtRoot, MalformedGame, PlanMismatch
from ..game import GameDefinition, LocalClique, RootedTree, clique_stats, validate_game
from ..verify import exact_regret
from .polymatrix import check_tree, slack_value, uniform_index
from .tables import EquilibriumProfile, FeasibilityTable, MessageTables

logger = logging.getLogger(__name__)


@dataclass
class _Level:
    """Reachable E tables after one elimination, with (p_child, previous row) witnesses"""
    values: np.ndarray
    witness: np.ndarray
    axes: Tuple[int, ...]

    def __len__(self) -> int:
        return len(self.values)


@dataclass
class _Player:
    player: int
    s: int
    grid: np.ndarray
    parent: Optional[int]
    children: Tuple[int, ...]
    axes: Tuple[int, ...]
    table: np.ndarray
    bound_pair: int
    bound_alone: int
    preferred: Optional[int]

    def ordered(self, candidates) -> List[int]:
        candidates = [int(g) for g in candidates]
        if self.preferred is not None and self.preferred in candidates:
            candidates.remove(self.preferred)
            candidates.insert(0, self.preferred)
        return candidates


def _projected_table(clique: Optional[LocalClique], plan: DiscretizationPlan, i: int,
                     shape: Tuple[int, ...]) -> Tuple[np.ndarray, object]:
    if clique is None:
        return np.zeros(shape, dtype=np.int64), 0
    stats = clique_stats(clique)
    if stats.range == 0:
        return np.zeros(shape, dtype=np.int64), 0
    lattice = plan.lattices[i]
    table = np.array([project((v - stats.l) / stats.range, lattice) for v in clique.payoffs.flat],
                     dtype=np.int64).reshape(shape)
    return table, stats.range


class NormalFormTreeDP:
    def __init__(self, game: GameDefinition, tree: RootedTree, plan: DiscretizationPlan, slack: str = "proven"):
        if any(len(game.cliques_of(i)) != 1 for i in game.players):
            raise MalformedGame("normal-form DP needs exactly one clique per player")
        if plan.variant is not Variant.REFINED:
            raise PlanMismatch("normal-form DP runs on a refined plan")
        self.stats = validate_game(game)
        check_tree(game, tree)
        self.game = game
        self.tree = tree
        self.plan = plan
        self.slack = slack
        self.slack_amount = slack_value(plan, slack)
        self.nodes = {i: self._node(i) for i in game.players}
        self._arcs: Dict[int, FeasibilityTable] = {}
        self._levels: Dict[Tuple[int, int], List[_Level]] = {}
        self.tables: Optional[MessageTables] = None

    def _node(self, i: int) -> _Player:
        s = self.plan.s(i)
        grid = grid_numerators(self.game.actions[i], s)
        cliques = self.game.cliques_of(i)
        clique = cliques[0] if cliques else None
        axes = clique.members if clique is not None else (i,)
        shape = tuple(self.game.actions[a] for a in axes)
        table, scale = _projected_table(clique, self.plan, i, shape)
        parent = self.tree.parent[i]
        tau = self.plan.lattices[i].tau
        normalized_slack = self.slack_amount / scale if scale else 0
        s_parent = self.plan.s(parent) if parent is not None else 1
        isolated = not self.stats.affected[i] and (clique is None or i in self.plan.indifferent)
        return _Player(
            player=i,
            s=s,
            grid=grid,
            parent=parent,
            children=tuple(self.tree.children[i]),
            axes=axes,
            table=table - table.flat[0],
            bound_pair=math.floor(s * s_parent * normalized_slack / tau),
            bound_alone=math.floor(s * normalized_slack / tau),
            preferred=uniform_index(grid, s) if isolated else None,
        )

    # --- collection pass ---

    def levels(self, i: int, g: int) -> List[_Level]:
        key = (i, g)
        if key in self._levels:
            return self._levels[key]
        node = self.nodes[i]
        axes = list(node.axes)
        current = _Level(node.table[None], np.full((1, 2), -1, dtype=np.int64), tuple(axes))
        result = [current]
        for c in node.children:
            feasible = self._arcs[c].choices(g)
            if c in axes:
                axes.remove(c)
            shape = tuple(self.game.actions[a] for a in axes)
            if not len(feasible) or not len(current):
                current = _Level(np.zeros((0,) + shape, dtype=np.int64), np.zeros((0, 2), dtype=np.int64),
                                 tuple(axes))
                result.append(current)
                continue
            k = len(current)
            if c in current.axes:
                child = self.nodes[c]
                axis = current.axes.index(c) + 1
                summed = np.tensordot(current.values, child.grid[feasible], axes=([axis], [1]))
                summed = np.moveaxis(summed, -1, 0)
                eliminated = (2 * summed + child.s) // (2 * child.s)
            else:
                eliminated = np.broadcast_to(current.values, (len(feasible),) + current.values.shape)
            flat = eliminated.reshape(len(feasible) * k, -1)
            flat = flat - flat[:, :1]
            _, first = np.unique(flat, axis=0, return_index=True)
            first = np.sort(first)
            current = _Level(
                flat[first].reshape((len(first),) + shape),
                np.stack([feasible[first // k], first % k], axis=1),
                tuple(axes),
            )
            result.append(current)
        self._levels[key] = result
        return result

    def _best_response(self, node: _Player, g: int, final: _Level, parent_rows: Optional[np.ndarray]) -> np.ndarray:
        """(tables, parent strategies) mask of the best-response test"""
        n_i = node.grid[g]
        if len(final.axes) == 2:
            payoff = np.einsum("kab,gb->kga", final.values, parent_rows)
            bound = node.bound_pair
        else:
            payoff = final.values[:, None, :]
            bound = node.bound_alone
        mixed = payoff @ n_i
        ok = (node.s * payoff - mixed[..., None]).max(axis=-1) <= bound
        if parent_rows is not None and ok.shape[1] != len(parent_rows):
            ok = np.broadcast_to(ok, (len(final), len(parent_rows)))
        return ok

    def collect(self, full_root: bool = False) -> MessageTables:
        root = self.tree.root
        self._arcs = {}
        self._levels = {}
        for i in self.tree.postorder():
            if i == root:
                continue
            node = self.nodes[i]
            parent_rows = self.nodes[node.parent].grid
            rows = []
            for g in range(len(node.grid)):
                final = self.levels(i, g)[-1]
                if len(final):
                    rows.append(np.flatnonzero(self._best_response(node, g, final, parent_rows).any(axis=0)))
                else:
                    rows.append(np.zeros(0, dtype=np.int64))
            table = FeasibilityTable.from_rows(i, node.parent, rows, len(parent_rows))
            self._arcs[i] = table
            logger.debug(f"arc {i}->{node.parent}: {table.count} of {len(rows) * len(parent_rows)} pairs feasible")

        node = self.nodes[root]
        feasible = []
        for g in node.ordered(range(len(node.grid))):
            final = self.levels(root, g)[-1]
            if len(final) and self._best_response(node, g, final, None).any():
                feasible.append(g)
                if not full_root:
                    break
        sum_bytes = sum(level.values.nbytes for levels in self._levels.values() for level in levels)
        root_table = FeasibilityTable.root_table(root, feasible, len(node.grid))
        self.tables = MessageTables(self._arcs, root_table, sum_bytes)
        logger.info(f"collection pass done: {self.tables.table_bytes} table bytes")
        return self.tables

    # --- assignment pass ---

    def _diagnostics(self) -> dict:
        return {
            "root": self.tree.root,
            "grid_denominators": {i: n.s for i, n in self.nodes.items()},
            "lattice_sizes": {i: self.plan.lattices[i].size for i in self.nodes},
            "slack": self.slack,
        }

    def assign(self) -> Dict[int, int]:
        if self.tables is None:
            self.collect()
        root = self.tree.root
        feasible = self.tables.root.choices()
        if not len(feasible):
            raise InfeasibleAtRoot(root, self._diagnostics())
        choice = {root: self.nodes[root].ordered(feasible)[0]}

        for i in self.tree.order():
            node = self.nodes[i]
            g = choice[i]
            levels = self.levels(i, g)
            parent_rows = None if node.parent is None else self.nodes[node.parent].grid[[choice[node.parent]]]
            ok = self._best_response(node, g, levels[-1], parent_rows)
            hits = np.flatnonzero(ok.any(axis=1))
            if not len(hits):
                raise InfeasibleAtRoot(root, dict(self._diagnostics(), player=i))
            row = int(hits[0])
            for level in range(len(node.children), 0, -1):
                child_index, row = (int(x) for x in levels[level].witness[row])
                choice[node.children[level - 1]] = child_index
        return choice

    def strategies(self, choice: Dict[int, int]) -> GridStrategyProfile:
        return {
            i: GridMixedStrategy(i, tuple(int(k) for k in node.grid[choice[i]]), node.s)
            for i, node in sorted(self.nodes.items())
        }


def solve_normalform_tree(game: GameDefinition, tree: RootedTree, plan: DiscretizationPlan,
                          epsilon, slack: str = "proven") -> EquilibriumProfile:
    """ε-MSNE of a tree graphical game in normal form, certified with exact regrets"""
    eps = positive_epsilon(epsilon)
    if eps != plan.epsilon:
        raise PlanMismatch(f"plan sized for epsilon {plan.epsilon}, requested {eps}")
    started = time.perf_counter()
    dp = NormalFormTreeDP(game, tree, plan, slack)
    tables = dp.collect()
    choice = dp.assign()
    strategies = dp.strategies(choice)
    report = exact_regret(game, strategies, eps)
    elapsed = time.perf_counter() - started
    logger.info(f"normal-form DP: max regret {float(report.max_regret):.6g} (epsilon {eps}) in {elapsed:.3f}s")
    if not report.passed and slack == "proven":
        raise CertificationFailed(f"max regret {report.max_regret} exceeds {eps}: {report.lines()}")
    return EquilibriumProfile(
        strategies=strategies,
        epsilon=eps,
        plan=plan.summary(),
        root=tree.root,
        slack=slack,
        solver="normalform",
        report=report,
        stats={"seconds": elapsed, "table_bytes": tables.table_bytes},
    )
