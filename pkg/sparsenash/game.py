"""
Game model for sparsenash
Graphical multi-hypermatrix games, structure statistics, exact payoffs
and payoff-scale normalization
"""

import logging
import warnings
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from .errors import (
    DegeneratePlayer,
    DimensionMismatch,
    MalformedGame,
    NotATree,
    NotPolymatrix,
    UnnormalizedStrategy,
)

logger = logging.getLogger(__name__)

ZERO = Fraction(0)


def to_rational(value: Any) -> Fraction:
    """Read an int, Fraction, decimal string or float repr as an exact rational"""
    if isinstance(value, bool):
        raise TypeError("booleans are not payoffs")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, float):
        if not np.isfinite(value):
            raise ValueError(f"non-finite value {value}")
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot read {value!r} as a rational")


_as_rationals = np.vectorize(to_rational, otypes=[object])


# ============ GAME TYPES ============

class GameKind(str, Enum):
    POLYMATRIX = "polymatrix"
    NORMAL_FORM = "normal-form"
    GENERAL = "general"


@dataclass(frozen=True, eq=False)
class LocalClique:
    """Payoff hypermatrix M'_{i,C} of owner i over the joint actions of members"""
    owner: int
    members: Tuple[int, ...]
    payoffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "owner", int(self.owner))
        object.__setattr__(self, "members", tuple(int(m) for m in self.members))
        table = np.array(self.payoffs, dtype=object)
        if table.size:
            table = _as_rationals(table)
        table.setflags(write=False)
        object.__setattr__(self, "payoffs", table)

    @classmethod
    def from_flat(cls, owner: int, members: Sequence[int], values: Sequence[Any],
                  shape: Sequence[int]) -> "LocalClique":
        """Build from row-major entries in member order"""
        table = np.array([to_rational(v) for v in values], dtype=object)
        return cls(owner, tuple(members), table.reshape(tuple(shape)))

    @property
    def size(self) -> int:
        return len(self.members)

    def axis(self, player: int) -> int:
        return self.members.index(player)

    def flat(self) -> List[Fraction]:
        return list(self.payoffs.flat)

    def with_payoffs(self, payoffs: np.ndarray) -> "LocalClique":
        return LocalClique(self.owner, self.members, payoffs)

    def __eq__(self, other):
        if not isinstance(other, LocalClique):
            return NotImplemented
        return (self.owner == other.owner and self.members == other.members
                and self.payoffs.shape == other.payoffs.shape
                and bool(np.all(self.payoffs == other.payoffs)))

    def __repr__(self):
        return f"LocalClique(owner={self.owner}, members={self.members}, shape={self.payoffs.shape})"


@dataclass(frozen=True, eq=False)
class GameDefinition:
    """Players 0..n-1, action counts and local cliques"""
    actions: Tuple[int, ...]
    cliques: Tuple[LocalClique, ...]
    indifferent: FrozenSet[int] = frozenset()
    metadata: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(int(a) for a in self.actions))
        object.__setattr__(self, "cliques", tuple(self.cliques))
        object.__setattr__(self, "indifferent", frozenset(self.indifferent))

    @property
    def n(self) -> int:
        return len(self.actions)

    @property
    def players(self) -> range:
        return range(self.n)

    def cliques_of(self, i: int) -> List[LocalClique]:
        return [c for c in self.cliques if c.owner == i]

    def clique_indices_of(self, i: int) -> List[int]:
        return [idx for idx, c in enumerate(self.cliques) if c.owner == i]

    def replace(self, **changes) -> "GameDefinition":
        return replace(self, **changes)

    def __eq__(self, other):
        if not isinstance(other, GameDefinition):
            return NotImplemented
        return (self.actions == other.actions and self.cliques == other.cliques
                and self.indifferent == other.indifferent)

    def __repr__(self):
        return f"GameDefinition(n={self.n}, actions={self.actions}, cliques={len(self.cliques)})"


@dataclass(frozen=True)
class CliqueStats:
    u: Fraction
    l: Fraction
    range: Fraction


@dataclass(frozen=True)
class StructureStats:
    kind: GameKind
    kappa_i: Tuple[int, ...]
    kappa: int
    kappa_prime_i: Tuple[int, ...]
    kappa_prime: int
    neighborhoods: Tuple[FrozenSet[int], ...]
    affected: Tuple[FrozenSet[int], ...]
    k_i: Tuple[int, ...]
    k: int


@dataclass(frozen=True)
class RootedTree:
    """Rooted spanning tree; children tuples are in elimination order"""
    root: int
    parent: Mapping[int, Optional[int]]
    children: Mapping[int, Tuple[int, ...]]

    def order(self) -> List[int]:
        """Top-down order, root first"""
        result, frontier = [], [self.root]
        while frontier:
            result.extend(frontier)
            frontier = [c for node in frontier for c in self.children[node]]
        return result

    def postorder(self) -> List[int]:
        """Bottom-up order, leaves before parents"""
        return list(reversed(self.order()))


# ============ STRUCTURE ============

def classify(game: GameDefinition) -> GameKind:
    if all(c.size == 2 for c in game.cliques):
        return GameKind.POLYMATRIX
    if all(len(game.cliques_of(i)) == 1 for i in game.players):
        return GameKind.NORMAL_FORM
    return GameKind.GENERAL


def validate_game(game: GameDefinition) -> StructureStats:
    """Check game invariants and derive structure statistics"""
    if game.n == 0:
        raise MalformedGame("game has no players")
    for i, count in enumerate(game.actions):
        if count < 1:
            raise MalformedGame(f"player {i} has {count} actions")

    for idx, clique in enumerate(game.cliques):
        members = clique.members
        if not members:
            raise MalformedGame(f"clique {idx} has no members")
        if clique.owner != members[0]:
            raise MalformedGame(f"clique {idx}: owner {clique.owner} must be the first member of {list(members)}")
        if len(set(members)) != len(members):
            raise MalformedGame(f"clique {idx}: duplicate members {list(members)}")
        for m in members:
            if not 0 <= m < game.n:
                raise MalformedGame(f"clique {idx}: unknown player {m}")
        expected = tuple(game.actions[m] for m in members)
        if clique.payoffs.shape != expected:
            raise MalformedGame(
                f"clique {idx}: payoff shape {clique.payoffs.shape} != {expected} "
                f"({int(np.prod(expected))} entries expected)"
            )

    neighborhoods = []
    for i in game.players:
        hood = {i}
        for clique in game.cliques_of(i):
            hood.update(clique.members)
        neighborhoods.append(frozenset(hood))
    affected = tuple(
        frozenset(j for j in game.players if j != i and i in neighborhoods[j])
        for i in game.players
    )
    kappa_i = tuple(len(game.cliques_of(i)) for i in game.players)
    kappa_prime_i = tuple(max((c.size for c in game.cliques_of(i)), default=0) for i in game.players)
    k_i = tuple(len(h) for h in neighborhoods)

    return StructureStats(
        kind=classify(game),
        kappa_i=kappa_i,
        kappa=max(kappa_i),
        kappa_prime_i=kappa_prime_i,
        kappa_prime=max(kappa_prime_i),
        neighborhoods=tuple(neighborhoods),
        affected=affected,
        k_i=k_i,
        k=max(k_i),
    )


def clique_stats(clique: LocalClique) -> CliqueStats:
    """Exact min, max and range of clique entries"""
    upper = Fraction(clique.payoffs.max())
    lower = Fraction(clique.payoffs.min())
    return CliqueStats(u=upper, l=lower, range=upper - lower)


def interaction_graph(game: GameDefinition) -> nx.Graph:
    """Undirected graph linking each clique owner to the other members"""
    graph = nx.Graph()
    graph.add_nodes_from(game.players)
    for clique in game.cliques:
        for member in clique.members[1:]:
            graph.add_edge(clique.owner, member)
    return graph


def root_tree(game: GameDefinition, root: int = 0,
              children_order: Optional[Mapping[int, Sequence[int]]] = None) -> RootedTree:
    """Root the interaction forest at `root`; other components hang off the root"""
    if not 0 <= root < game.n:
        raise MalformedGame(f"root {root} is not a player")
    graph = interaction_graph(game)
    if not nx.is_forest(graph):
        cycle = nx.find_cycle(graph)
        raise NotATree(f"interaction graph has a cycle through {[u for u, _ in cycle]}")

    parent: Dict[int, Optional[int]] = {root: None}
    children: Dict[int, List[int]] = {i: [] for i in game.players}
    for component in nx.connected_components(graph):
        anchor = root if root in component else min(component)
        for u, v in nx.bfs_edges(graph, anchor):
            parent[v] = u
            children[u].append(v)
        if anchor != root:
            # payoff-free arc
            parent[anchor] = root
            children[root].append(anchor)

    ordered = {}
    for i, kids in children.items():
        if children_order and i in children_order:
            wanted = [int(c) for c in children_order[i]]
            if sorted(wanted) != sorted(kids):
                raise MalformedGame(f"children order for {i} must be a permutation of {sorted(kids)}")
            ordered[i] = tuple(wanted)
        else:
            ordered[i] = tuple(sorted(kids))
    return RootedTree(root=root, parent=parent, children=ordered)


# ============ EXACT PAYOFFS ============

def as_distribution(strategy: Any, m: int) -> np.ndarray:
    """Exact probability vector from a grid strategy or a sequence of rationals"""
    probabilities = getattr(strategy, "probabilities", strategy)
    if len(probabilities) != m:
        raise DimensionMismatch(f"strategy has {len(probabilities)} entries, player has {m} actions")
    vector = np.array([to_rational(p) for p in probabilities], dtype=object)
    if any(p < 0 for p in vector) or sum(vector, ZERO) != 1:
        raise UnnormalizedStrategy(f"not a distribution: {[str(p) for p in vector]}")
    return vector


def exact_local_payoff(game: GameDefinition, i: int,
                       joint_action: Union[Mapping[int, int], Sequence[int]]) -> Fraction:
    """M'_i(a_{N_i}): exact sum of i's clique entries"""
    total = ZERO
    for clique in game.cliques_of(i):
        try:
            index = tuple(int(joint_action[m]) for m in clique.members)
        except (KeyError, IndexError):
            raise DimensionMismatch(f"joint action misses a member of {list(clique.members)}")
        for m, a in zip(clique.members, index):
            if not 0 <= a < game.actions[m]:
                raise DimensionMismatch(f"action {a} out of range for player {m}")
        total += clique.payoffs[index]
    return total


def exact_expected_clique_payoff(clique: LocalClique, fixed: Mapping[int, int],
                                 mixed: Mapping[int, Any]) -> Fraction:
    """Expected clique entry with `fixed` members pinned and the rest mixing"""
    table = clique.payoffs
    for axis in reversed(range(clique.size)):
        player = clique.members[axis]
        if player in fixed:
            table = np.take(table, int(fixed[player]), axis=axis)
        elif player in mixed:
            p = as_distribution(mixed[player], clique.payoffs.shape[axis])
            table = np.tensordot(table, p, axes=([axis], [0]))
        else:
            raise DimensionMismatch(f"player {player} is neither fixed nor mixed")
    if isinstance(table, np.ndarray):
        table = table.item()
    return Fraction(table)


# ============ NORMALIZATION ============

def polymatrix_bounds(game: GameDefinition, i: int) -> Tuple[Fraction, Fraction]:
    """(u_i, l_i): extreme total local payoffs, one max/min per edge"""
    if classify(game) is not GameKind.POLYMATRIX:
        raise NotPolymatrix("bounds need every clique to have two members")
    cliques = game.cliques_of(i)
    if not cliques:
        return ZERO, ZERO
    best = sum((c.payoffs.max(axis=1) for c in cliques[1:]), cliques[0].payoffs.max(axis=1))
    worst = sum((c.payoffs.min(axis=1) for c in cliques[1:]), cliques[0].payoffs.min(axis=1))
    return Fraction(best.max()), Fraction(worst.min())


def _zeroed(clique: LocalClique) -> LocalClique:
    return clique.with_payoffs(np.full(clique.payoffs.shape, ZERO, dtype=object))


def _flag_degenerate(i: int):
    message = f"player {i} has constant payoff; matrices zeroed, player indifferent"
    logger.warning(message)
    warnings.warn(message, DegeneratePlayer, stacklevel=3)


def normalize_polymatrix(game: GameDefinition) -> GameDefinition:
    """Affinely map every player's total local payoff onto [0, 1]"""
    if classify(game) is not GameKind.POLYMATRIX:
        raise NotPolymatrix("normalize_polymatrix needs a polymatrix game")
    replaced: Dict[int, LocalClique] = {}
    indifferent = set(game.indifferent)
    for i in game.players:
        indices = game.clique_indices_of(i)
        upper, lower = polymatrix_bounds(game, i)
        if not indices:
            indifferent.add(i)
            continue
        if upper == lower:
            _flag_degenerate(i)
            indifferent.add(i)
            for idx in indices:
                replaced[idx] = _zeroed(game.cliques[idx])
            continue
        shift = lower / len(indices)
        span = upper - lower
        for idx in indices:
            clique = game.cliques[idx]
            replaced[idx] = clique.with_payoffs((clique.payoffs - shift) / span)

    cliques = tuple(replaced.get(idx, c) for idx, c in enumerate(game.cliques))
    metadata = dict(game.metadata, normalized=True)
    return game.replace(cliques=cliques, indifferent=frozenset(indifferent), metadata=metadata)


def normalize_normalform(game: GameDefinition) -> GameDefinition:
    """Map each player's single local clique onto [0, 1]"""
    if classify(game) is not GameKind.NORMAL_FORM:
        raise MalformedGame("normal-form normalization needs exactly one clique per player")
    cliques = []
    indifferent = set(game.indifferent)
    for clique in game.cliques:
        stats = clique_stats(clique)
        if stats.range == 0:
            _flag_degenerate(clique.owner)
            indifferent.add(clique.owner)
            cliques.append(_zeroed(clique))
        else:
            cliques.append(clique.with_payoffs((clique.payoffs - stats.l) / stats.range))
    metadata = dict(game.metadata, normalized=True)
    return game.replace(cliques=tuple(cliques), indifferent=frozenset(indifferent), metadata=metadata)


def normalize(game: GameDefinition) -> GameDefinition:
    """Normalize polymatrix and normal-form games; general games pass through"""
    kind = classify(game)
    if kind is GameKind.POLYMATRIX:
        return normalize_polymatrix(game)
    if kind is GameKind.NORMAL_FORM:
        return normalize_normalform(game)
    logger.warning("general GMhG: payoff scale taken as given")
    return game


def _embed(clique: LocalClique, members: Tuple[int, ...], actions: Tuple[int, ...]) -> np.ndarray:
    positions = [members.index(p) for p in clique.members]
    table = np.transpose(clique.payoffs, np.argsort(positions))
    shape = [1] * len(members)
    for p in clique.members:
        shape[members.index(p)] = actions[p]
    return table.reshape(shape)


def as_normalform(game: GameDefinition) -> GameDefinition:
    """Fold each player's cliques into one hypermatrix over N_i"""
    cliques = []
    for i in game.players:
        hood = {i}
        for clique in game.cliques_of(i):
            hood.update(clique.members)
        members = (i,) + tuple(sorted(hood - {i}))
        total = np.full(tuple(game.actions[m] for m in members), ZERO, dtype=object)
        for clique in game.cliques_of(i):
            total = total + _embed(clique, members, game.actions)
        cliques.append(LocalClique(i, members, total))
    metadata = dict(game.metadata, folded=True)
    return game.replace(cliques=tuple(cliques), metadata=metadata)
