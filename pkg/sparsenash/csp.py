"""
CSP builder for sparsenash
The game-induced constraint satisfaction problem (simple and refined
variants), constructive MSNE rounding and a backtracking oracle
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from . import config
from .discretize import (
    DiscretizationPlan,
    GridMixedStrategy,
    Variant,
    positive_epsilon,
    project,
    round_to_grid,
)
from .errors import (
    DimensionMismatch,
    NodeLimitExceeded,
    PlanMismatch,
    SparseNashError,
)
from .game import (
    GameDefinition,
    GameKind,
    RootedTree,
    classify,
    clique_stats,
    exact_expected_clique_payoff,
    validate_game,
)

logger = logging.getLogger(__name__)

TWO_THIRDS = Fraction(2, 3)

Assignment = Dict[str, int]


def p_name(i: int, a: int) -> str:
    return f"p[{i},{a}]"


def s_name(i: int, l: int, a: int) -> str:
    return f"S[{i},{l},{a}]"


def e_name(i: int, l: int, t: int, residual: Sequence[int]) -> str:
    return f"E[{i},{l},{t},{'.'.join(str(a) for a in residual)}]"


# ============ CSP TYPES ============

@dataclass(frozen=True)
class CSPVariable:
    name: str
    kind: str
    player: int
    lo: int
    hi: int

    @property
    def domain(self) -> range:
        return range(self.lo, self.hi + 1)


@dataclass(frozen=True, eq=False)
class CSPConstraint:
    """Predicate over a scope; functional constraints also name a target they determine"""
    cid: str
    kind: str
    player: int
    scope: Tuple[str, ...]
    check: Callable[[Mapping[str, int]], bool]
    target: Optional[str] = None
    compute: Optional[Callable[[Mapping[str, int]], int]] = None

    def holds(self, values: Mapping[str, int]) -> bool:
        try:
            return bool(self.check(values))
        except SparseNashError:
            return False


@dataclass(eq=False)
class CSPInstance:
    variables: List[CSPVariable]
    constraints: List[CSPConstraint]
    clique_order: Dict[int, Tuple[int, ...]] = field(default_factory=dict)
    variant: Optional[Variant] = None
    epsilon: Optional[Fraction] = None
    plan: Optional[DiscretizationPlan] = None
    game: Optional[GameDefinition] = None
    root: Optional[int] = None

    def __post_init__(self):
        self._by_name = {v.name: v for v in self.variables}
        for con in self.constraints:
            for name in con.scope:
                if name not in self._by_name:
                    raise DimensionMismatch(f"constraint {con.cid} references unknown variable {name}")

    def variable(self, name: str) -> CSPVariable:
        return self._by_name[name]

    def count(self, kind: str) -> int:
        return sum(1 for v in self.variables if v.kind == kind)

    def profile(self, assignment: Mapping[str, int]) -> Dict[int, GridMixedStrategy]:
        """Grid profile held by the probability variables"""
        profile = {}
        for i in self.game.players:
            numerators = tuple(assignment[p_name(i, a)] for a in range(self.game.actions[i]))
            profile[i] = GridMixedStrategy(i, numerators, self.plan.s(i))
        return profile


@dataclass(frozen=True)
class CheckResult:
    satisfied: bool
    violated: Optional[str] = None
    kind: Optional[str] = None

    def __bool__(self):
        return self.satisfied


@dataclass(frozen=True)
class BacktrackResult:
    status: str
    assignment: Optional[Assignment]
    nodes: int


# ============ ORDERING ============

def order_cliques(game: GameDefinition, i: int, tree: Optional[RootedTree] = None) -> Tuple[int, ...]:
    """Clique indices of i: tree children order with the parent edge last, else input order"""
    owned = game.clique_indices_of(i)
    if tree is None or classify(game) is not GameKind.POLYMATRIX:
        return tuple(owned)
    children = tree.children[i]
    parent = tree.parent.get(i)

    def position(idx):
        other = game.cliques[idx].members[1]
        if other in children:
            return 0, children.index(other), idx
        if other == parent:
            return 1, 0, idx
        return 2, 0, idx

    return tuple(sorted(owned, key=position))


def _orders(game: GameDefinition, plan: DiscretizationPlan,
            tree: Optional[RootedTree]) -> Dict[int, Tuple[int, ...]]:
    if plan.variant is Variant.REFINED:
        return {i: tuple(plan.clique_orders[i]) for i in game.players}
    return {i: order_cliques(game, i, tree) for i in game.players}


# ============ CONSTRUCTION ============

class _Builder:
    """Emits variables and constraints; constraint order follows dependencies"""

    def __init__(self, game: GameDefinition, plan: DiscretizationPlan, orders: Dict[int, Tuple[int, ...]]):
        self.game = game
        self.plan = plan
        self.orders = orders
        self.variables: List[CSPVariable] = []
        self.constraints: List[CSPConstraint] = []
        self._expectations: Dict[tuple, Fraction] = {}

    # --- helpers ---

    def _var(self, name: str, kind: str, player: int, lo: int, hi: int):
        self.variables.append(CSPVariable(name, kind, player, lo, hi))

    def _strategy(self, values: Mapping[str, int], j: int) -> Tuple[int, ...]:
        return tuple(values[p_name(j, b)] for b in range(self.game.actions[j]))

    def _expected(self, idx: int, a: int, others: Tuple[Tuple[int, ...], ...]) -> Fraction:
        key = (idx, a, others)
        if key not in self._expectations:
            clique = self.game.cliques[idx]
            mixed = {
                j: [Fraction(k, self.plan.s(j)) for k in nums]
                for j, nums in zip(clique.members[1:], others)
            }
            self._expectations[key] = exact_expected_clique_payoff(clique, {clique.owner: a}, mixed)
        return self._expectations[key]

    def _add(self, cid, kind, player, scope, check, target=None, compute=None):
        self.constraints.append(CSPConstraint(cid, kind, player, tuple(scope), check, target, compute))

    @staticmethod
    def _functional(target: str, compute: Callable[[Mapping[str, int]], int]):
        return lambda values: values[target] == compute(values)

    # --- shared pieces ---

    def probabilities(self):
        for i in self.game.players:
            for a in range(self.game.actions[i]):
                self._var(p_name(i, a), "p", i, 0, self.plan.s(i))

    def normalization(self, i: int):
        names = [p_name(i, a) for a in range(self.game.actions[i])]
        s = self.plan.s(i)

        def check(values):
            return sum(values[n] for n in names) == s

        def compute(values):
            return s - sum(values[n] for n in names[:-1])

        self._add(f"Normalization({i})", "Normalization", i, names, check, names[-1], compute)

    def best_response(self, i: int, final: Optional[List[str]], slack_value: Optional[Fraction]):
        m = self.game.actions[i]
        s = self.plan.s(i)
        tau = self.plan.lattices[i].tau
        probs = [p_name(i, a) for a in range(m)]
        scope_tail = final or []
        for a in range(m):
            if final is None or slack_value is None:
                check = (lambda values: True)
            else:
                def check(values, a=a):
                    mixed = sum(values[pn] * values[sn] for pn, sn in zip(probs, final))
                    return (s * values[final[a]] - mixed) * tau <= s * slack_value
            self._add(f"BestResponse({i},{a})", "BestResponse", i, probs + scope_tail, check)

    # --- simple variant ---

    def simple_player(self, i: int):
        lattice = self.plan.lattices[i]
        order = self.orders[i]
        m = self.game.actions[i]
        for l, idx in enumerate(order, start=1):
            for a in range(m):
                self._var(s_name(i, l, a), "S", i, lattice.lo_index, lattice.hi_index)
        for l, idx in enumerate(order, start=1):
            others = self.game.cliques[idx].members[1:]
            for a in range(m):
                target = s_name(i, l, a)
                previous = s_name(i, l - 1, a) if l > 1 else None

                def compute(values, idx=idx, a=a, others=others, previous=previous):
                    nums = tuple(self._strategy(values, j) for j in others)
                    k = project(self._expected(idx, a, nums), lattice, warn=False)
                    return k + (values[previous] if previous else 0)

                scope = [p_name(j, b) for j in others for b in range(self.game.actions[j])]
                scope += [target] + ([previous] if previous else [])
                self._add(f"PartialSum({i},{l},{a})", "PartialSum", i, scope,
                          self._functional(target, compute), target, compute)
        final = [s_name(i, len(order), a) for a in range(m)] if order else None
        self.best_response(i, final, TWO_THIRDS * self.plan.sizing_epsilon)

    # --- refined variant ---

    def refined_player(self, i: int):
        lattice = self.plan.lattices[i]
        order = self.orders[i]
        m = self.game.actions[i]
        finals = []
        ranges = []
        for l, idx in enumerate(order, start=1):
            finals.append(self._expectation_chain(i, l, idx, lattice))
            ranges.append(clique_stats(self.game.cliques[idx]).range)

        for l in range(1, len(order) + 1):
            for a in range(m):
                self._var(s_name(i, l, a), "S", i, lattice.lo_index, lattice.hi_index)
        weight = Fraction(0)
        for l, (last_e, r) in enumerate(zip(finals, ranges), start=1):
            previous_weight, weight = weight, weight + r
            for a in range(m):
                target = s_name(i, l, a)
                e_var = last_e[a]
                previous = s_name(i, l - 1, a) if l > 1 else None
                if previous is None or weight == 0:
                    def compute(values, e_var=e_var):
                        return values[e_var]
                    scope = [e_var, target] + ([previous] if previous else [])
                else:
                    def compute(values, e_var=e_var, previous=previous, r=r, pw=previous_weight, w=weight):
                        mixed = (r * lattice.value(values[e_var]) + pw * lattice.value(values[previous])) / w
                        return project(mixed, lattice, warn=False)
                    scope = [e_var, previous, target]
                self._add(f"PartialSum({i},{l},{a})", "PartialSum", i, scope,
                          self._functional(target, compute), target, compute)

        final = [s_name(i, len(order), a) for a in range(m)] if order else None
        slack = TWO_THIRDS * self.plan.sizing_epsilon / weight if weight > 0 else None
        self.best_response(i, final, slack)

    def _expectation_chain(self, i: int, l: int, idx: int, lattice) -> List[str]:
        """E variables of one clique; returns the names indexed by a_i only"""
        clique = self.game.cliques[idx]
        stats = clique_stats(clique)
        table = clique.payoffs
        normalized = ((table - stats.l) / stats.range) if stats.range else (table - table)
        members = clique.members
        sizes = [self.game.actions[j] for j in members]

        if len(members) == 1:
            names = []
            for a in range(sizes[0]):
                target = e_name(i, l, 0, (a,))
                self._var(target, "E", i, lattice.lo_index, lattice.hi_index)
                names.append(target)

                def compute(values, a=a):
                    return project(normalized[a], lattice, warn=False)

                self._add(f"PartialExp({i},{l},0,{a})", "PartialExp", i, [target],
                          self._functional(target, compute), target, compute)
            return names

        for t in range(1, len(members)):
            eliminated = members[t]
            residual_sizes = [sizes[0]] + sizes[t + 1:]
            for residual in product(*[range(k) for k in residual_sizes]):
                self._var(e_name(i, l, t, residual), "E", i, lattice.lo_index, lattice.hi_index)
            for residual in product(*[range(k) for k in residual_sizes]):
                target = e_name(i, l, t, residual)
                probs = [p_name(eliminated, b) for b in range(sizes[t])]
                s_elim = self.plan.s(eliminated)
                if t == 1:
                    def compute(values, residual=residual, probs=probs, s_elim=s_elim):
                        total = sum(
                            values[pn] * normalized[(residual[0], b) + tuple(residual[1:])]
                            for b, pn in enumerate(probs)
                        )
                        return project(Fraction(total) / s_elim, lattice, warn=False)
                    inputs = []
                else:
                    inputs = [e_name(i, l, t - 1, (residual[0], b) + tuple(residual[1:]))
                              for b in range(sizes[t])]

                    def compute(values, probs=probs, inputs=inputs, s_elim=s_elim):
                        total = sum(values[pn] * values[en] for pn, en in zip(probs, inputs))
                        return project(lattice.value(total) / s_elim, lattice, warn=False)
                self._add(f"PartialExp({i},{l},{t},{'.'.join(map(str, residual))})", "PartialExp", i,
                          probs + inputs + [target], self._functional(target, compute), target, compute)
        last = len(members) - 1
        return [e_name(i, l, last, (a,)) for a in range(sizes[0])]

    def build(self, variant: Variant) -> Tuple[List[CSPVariable], List[CSPConstraint]]:
        self.probabilities()
        for i in self.game.players:
            self.normalization(i)
        for i in self.game.players:
            if variant is Variant.SIMPLE:
                self.simple_player(i)
            else:
                self.refined_player(i)
        return self.variables, self.constraints


def build_csp(game: GameDefinition, plan: DiscretizationPlan, epsilon, variant,
              tree: Optional[RootedTree] = None) -> CSPInstance:
    """Materialize the CSP whose solutions are sparse ε-MSNE representations"""
    variant = Variant(variant)
    if plan.variant is not variant:
        raise PlanMismatch(f"plan is {plan.variant.value}, requested {variant.value}")
    if positive_epsilon(epsilon) != plan.epsilon:
        raise PlanMismatch(f"plan sized for epsilon {plan.epsilon}, requested {epsilon}")
    validate_game(game)
    orders = _orders(game, plan, tree)
    variables, constraints = _Builder(game, plan, orders).build(variant)
    csp = CSPInstance(
        variables=variables,
        constraints=constraints,
        clique_order=orders,
        variant=variant,
        epsilon=plan.epsilon,
        plan=plan,
        game=game,
        root=tree.root if tree is not None else None,
    )
    logger.info(f"{variant.value} CSP: {len(variables)} variables, {len(constraints)} constraints")
    return csp


# ============ ASSIGNMENTS ============

def complete_assignment(csp: CSPInstance, probabilities: Mapping[str, int]) -> Assignment:
    """Fill every functional variable from the probability part"""
    values: Assignment = dict(probabilities)
    for con in csp.constraints:
        if con.target is not None and con.target not in values:
            values[con.target] = con.compute(values)
    return values


def round_msne_to_assignment(game: GameDefinition, plan: DiscretizationPlan, exact_profile: Mapping[int, object],
                             tree: Optional[RootedTree] = None) -> Assignment:
    """Round each strategy to its ℓ∞-nearest grid point, then rebuild S* (and E*)"""
    csp = build_csp(game, plan, plan.epsilon, plan.variant, tree)
    probabilities = {}
    for i in game.players:
        if i not in exact_profile:
            raise DimensionMismatch(f"profile misses player {i}")
        rounded = round_to_grid(exact_profile[i], plan.s(i), player=i)
        for a, k in enumerate(rounded.numerators):
            probabilities[p_name(i, a)] = k
    return complete_assignment(csp, probabilities)


def check_assignment(csp: CSPInstance, assignment: Mapping[str, int]) -> CheckResult:
    """Evaluate every constraint exactly; report the first violation"""
    for var in csp.variables:
        if var.name not in assignment:
            raise DimensionMismatch(f"assignment misses variable {var.name}")
        if not var.lo <= assignment[var.name] <= var.hi:
            return CheckResult(False, f"Domain({var.name})", "Domain")
    for con in csp.constraints:
        if not con.holds(assignment):
            return CheckResult(False, con.cid, con.kind)
    return CheckResult(True)


# ============ BACKTRACKING ============

class _Search:
    """Depth-first search with forward checking; domains are restored on backtrack"""

    def __init__(self, csp: CSPInstance, limit: int):
        self.csp = csp
        self.limit = limit
        self.nodes = 0
        self.names = [v.name for v in csp.variables]
        self.domains = {v.name: list(v.domain) for v in csp.variables}
        self.watching: Dict[str, List[CSPConstraint]] = {name: [] for name in self.names}
        for con in csp.constraints:
            for name in set(con.scope):
                self.watching[name].append(con)
        self.assignment: Assignment = {}

    def _undo(self, saved):
        for name, previous in reversed(saved):
            self.domains[name] = previous

    def _forward_check(self, var: str):
        saved = []
        assignment = self.assignment
        for con in self.watching[var]:
            open_vars = {u for u in con.scope if u not in assignment}
            if not open_vars:
                if not con.holds(assignment):
                    self._undo(saved)
                    return None
                continue
            if len(open_vars) != 1:
                continue
            u = open_vars.pop()
            if con.target == u and con.compute is not None:
                value = con.compute(assignment)
                kept = [value] if value in self.domains[u] else []
            else:
                kept = []
                for value in self.domains[u]:
                    assignment[u] = value
                    if con.holds(assignment):
                        kept.append(value)
                    del assignment[u]
            if kept != self.domains[u]:
                saved.append((u, self.domains[u]))
                self.domains[u] = kept
            if not kept:
                self._undo(saved)
                return None
        return saved

    def solutions(self, depth: int = 0) -> Iterator[Assignment]:
        if depth == len(self.names):
            yield dict(self.assignment)
            return
        var = self.names[depth]
        for value in list(self.domains[var]):
            self.nodes += 1
            if self.nodes > self.limit:
                raise NodeLimitExceeded(f"node limit {self.limit} reached")
            self.assignment[var] = value
            saved = self._forward_check(var)
            if saved is not None:
                yield from self.solutions(depth + 1)
                self._undo(saved)
            del self.assignment[var]


def iter_solutions(csp: CSPInstance, node_limit: Optional[int] = None) -> Iterator[Assignment]:
    """Every satisfying assignment, depth-first in declared variable order"""
    if any(not con.scope and not con.holds({}) for con in csp.constraints):
        return
    search = _Search(csp, node_limit if node_limit is not None else config.NODE_LIMIT)
    yield from search.solutions()
    logger.debug(f"backtracking explored {search.nodes} nodes")


def solve_backtracking(csp: CSPInstance, node_limit: Optional[int] = None) -> BacktrackResult:
    """First satisfying assignment, or an authoritative infeasible verdict within the limit"""
    if any(not con.scope and not con.holds({}) for con in csp.constraints):
        return BacktrackResult("infeasible", None, 0)
    search = _Search(csp, node_limit if node_limit is not None else config.NODE_LIMIT)
    try:
        for assignment in search.solutions():
            return BacktrackResult("solved", assignment, search.nodes)
    except NodeLimitExceeded:
        logger.warning(f"backtracking stopped after {search.nodes - 1} nodes")
        return BacktrackResult("limit_exceeded", None, search.nodes - 1)
    return BacktrackResult("infeasible", None, search.nodes)
