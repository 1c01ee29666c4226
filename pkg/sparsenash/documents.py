"""
JSON documents for sparsenash
Game, profile, CSP and table-dump schemas with exact rational payloads
"""

import json
import logging
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Type, TypeVar, Union

from pydantic import BaseModel, Field, StrictInt, ValidationError

from .csp import CSPInstance, build_csp
from .discretize import (
    DiscretizationPlan,
    GridMixedStrategy,
    GridStrategyProfile,
    Variant,
    plan_refined,
    plan_simple,
)
from .errors import PlanMismatch, SchemaError
from .game import GameDefinition, GameKind, LocalClique, root_tree, to_rational, validate_game

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

Model = TypeVar("Model", bound=BaseModel)


# ============ RATIONALS ============

def format_rational(value: Any) -> str:
    """Terminating decimals as decimal strings, everything else as p/q"""
    q = to_rational(value)
    rest, twos, fives = q.denominator, 0, 0
    while rest % 2 == 0:
        rest, twos = rest // 2, twos + 1
    while rest % 5 == 0:
        rest, fives = rest // 5, fives + 1
    if rest != 1:
        return f"{q.numerator}/{q.denominator}"
    digits = max(twos, fives)
    if digits == 0:
        return str(q.numerator)
    scaled = abs(q.numerator) * (10 ** digits // q.denominator)
    whole, frac = divmod(scaled, 10 ** digits)
    sign = "-" if q < 0 else ""
    return f"{sign}{whole}.{str(frac).rjust(digits, '0').rstrip('0')}"


def parse_rational(text: Union[str, int], path: str) -> Fraction:
    try:
        return to_rational(text)
    except (ValueError, TypeError, ZeroDivisionError):
        raise SchemaError(path, f"{text!r} is not a rational number")


def _pointer(loc: Sequence[Any]) -> str:
    return "/" + "/".join(str(part) for part in loc) if loc else "/"


def _validated(model: Type[Model], data: Any, prefix: str = "") -> Model:
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        error = exc.errors()[0]
        raise SchemaError(prefix + _pointer(error["loc"]), error["msg"])


def _loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("/", f"invalid JSON at line {exc.lineno}: {exc.msg}")


def _dumps(model: BaseModel) -> str:
    return json.dumps(model.model_dump(), indent=2, ensure_ascii=False) + "\n"


# ============ GAME DOCUMENT ============

class PlayerEntry(BaseModel):
    id: StrictInt
    actions: StrictInt = Field(ge=1)


class CliqueEntry(BaseModel):
    owner: StrictInt
    members: List[StrictInt]
    payoffs: List[Union[StrictInt, str]]


class GameDocument(BaseModel):
    schema_version: StrictInt = SCHEMA_VERSION
    players: List[PlayerEntry]
    cliques: List[CliqueEntry]
    indifferent: List[StrictInt] = []
    metadata: Dict[str, Any] = {}


def game_to_document(game: GameDefinition) -> GameDocument:
    cliques = sorted(game.cliques, key=lambda c: (c.owner, c.members))
    return GameDocument(
        players=[PlayerEntry(id=i, actions=m) for i, m in enumerate(game.actions)],
        cliques=[
            CliqueEntry(owner=c.owner, members=list(c.members), payoffs=[format_rational(v) for v in c.flat()])
            for c in cliques
        ],
        indifferent=sorted(game.indifferent),
        metadata=dict(game.metadata),
    )


def game_from_document(doc: GameDocument, prefix: str = "") -> GameDefinition:
    if doc.schema_version != SCHEMA_VERSION:
        raise SchemaError(f"{prefix}/schema_version", f"unsupported version {doc.schema_version}")
    players = sorted(doc.players, key=lambda p: p.id)
    if [p.id for p in players] != list(range(len(players))):
        raise SchemaError(f"{prefix}/players", "player ids must be 0..n-1 without gaps")
    actions = tuple(p.actions for p in players)

    cliques = []
    for idx, entry in enumerate(doc.cliques):
        path = f"{prefix}/cliques/{idx}"
        if not entry.members or entry.members[0] != entry.owner:
            raise SchemaError(f"{path}/members", "owner must be the first member")
        for k, member in enumerate(entry.members):
            if not 0 <= member < len(actions):
                raise SchemaError(f"{path}/members/{k}", f"unknown player {member}")
        shape = tuple(actions[m] for m in entry.members)
        expected = math.prod(shape)
        if len(entry.payoffs) != expected:
            raise SchemaError(f"{path}/payoffs", f"{len(entry.payoffs)} entries, expected {expected}")
        values = [parse_rational(v, f"{path}/payoffs/{k}") for k, v in enumerate(entry.payoffs)]
        cliques.append(LocalClique.from_flat(entry.owner, entry.members, values, shape))

    for k, i in enumerate(doc.indifferent):
        if not 0 <= i < len(actions):
            raise SchemaError(f"{prefix}/indifferent/{k}", f"unknown player {i}")
    game = GameDefinition(actions, tuple(cliques), frozenset(doc.indifferent), dict(doc.metadata))
    validate_game(game)
    return game


def parse_game(text: str) -> GameDefinition:
    return game_from_document(_validated(GameDocument, _loads(text)))


def serialize_game(game: GameDefinition) -> str:
    return _dumps(game_to_document(game))


# ============ PROFILE DOCUMENT ============

class StrategyEntry(BaseModel):
    id: StrictInt
    grid_denominator: StrictInt = Field(ge=1)
    numerators: List[StrictInt]


class RegretEntry(BaseModel):
    id: StrictInt
    regret: str
    passed: bool


class Provenance(BaseModel):
    solver: Optional[str] = None
    variant: Optional[str] = None
    root: Optional[int] = None
    slack: Optional[str] = None
    seed: Optional[int] = None


class ProfileDocument(BaseModel):
    schema_version: StrictInt = SCHEMA_VERSION
    epsilon: str
    strategies: List[StrategyEntry]
    regrets: List[RegretEntry] = []
    max_regret: Optional[str] = None
    verified: Optional[bool] = None
    provenance: Provenance = Provenance()
    plan: Dict[str, Any] = {}
    partial_sums: Dict[str, List[int]] = {}


def regret_entries(report) -> List[RegretEntry]:
    verdicts = report.verdicts
    return [
        RegretEntry(id=i, regret=format_rational(r), passed=verdicts[i])
        for i, r in sorted(report.regrets.items())
    ]


def profile_to_document(result, seed: Optional[int] = None) -> ProfileDocument:
    """Document for an EquilibriumProfile"""
    report = result.report
    return ProfileDocument(
        epsilon=format_rational(result.epsilon),
        strategies=[
            StrategyEntry(id=i, grid_denominator=p.s, numerators=list(p.numerators))
            for i, p in sorted(result.strategies.items())
        ],
        regrets=regret_entries(report) if report is not None else [],
        max_regret=format_rational(report.max_regret) if report is not None else None,
        verified=report.passed if report is not None else None,
        provenance=Provenance(
            solver=result.solver,
            variant=result.plan.get("variant"),
            root=result.root,
            slack=result.slack,
            seed=seed,
        ),
        plan=dict(result.plan),
        partial_sums={str(i): list(v) for i, v in sorted(result.partial_sums.items())},
    )


def profile_from_document(doc: ProfileDocument) -> Tuple[GridStrategyProfile, Fraction]:
    profile = {}
    for k, entry in enumerate(doc.strategies):
        if sum(entry.numerators) != entry.grid_denominator or any(x < 0 for x in entry.numerators):
            raise SchemaError(f"/strategies/{k}/numerators",
                              f"numerators must be non-negative and sum to {entry.grid_denominator}")
        if entry.id in profile:
            raise SchemaError(f"/strategies/{k}/id", f"duplicate player {entry.id}")
        profile[entry.id] = GridMixedStrategy(entry.id, tuple(entry.numerators), entry.grid_denominator)
    return profile, parse_rational(doc.epsilon, "/epsilon")


def parse_profile(text: str) -> Tuple[GridStrategyProfile, Fraction]:
    return profile_from_document(_validated(ProfileDocument, _loads(text)))


def serialize_profile(result, seed: Optional[int] = None) -> str:
    return _dumps(profile_to_document(result, seed))


# ============ CSP DOCUMENT ============

class VariableEntry(BaseModel):
    name: str
    kind: str
    player: StrictInt
    lo: StrictInt
    hi: StrictInt


class ConstraintEntry(BaseModel):
    id: str
    kind: str
    player: StrictInt
    scope: List[str]


class CSPDocument(BaseModel):
    schema_version: StrictInt = SCHEMA_VERSION
    variant: str
    epsilon: str
    root: Optional[StrictInt] = None
    game: GameDocument
    variables: List[VariableEntry]
    constraints: List[ConstraintEntry]
    clique_order: Dict[str, List[int]] = {}


def csp_to_document(csp: CSPInstance) -> CSPDocument:
    return CSPDocument(
        variant=csp.variant.value,
        epsilon=format_rational(csp.epsilon),
        root=csp.root,
        game=game_to_document(csp.game),
        variables=[VariableEntry(name=v.name, kind=v.kind, player=v.player, lo=v.lo, hi=v.hi)
                   for v in csp.variables],
        constraints=[ConstraintEntry(id=c.cid, kind=c.kind, player=c.player, scope=list(c.scope))
                     for c in csp.constraints],
        clique_order={str(i): list(order) for i, order in sorted(csp.clique_order.items())},
    )


def make_plan(game: GameDefinition, epsilon: Any, variant: Union[str, Variant]) -> DiscretizationPlan:
    stats = validate_game(game)
    if Variant(variant) is Variant.SIMPLE:
        return plan_simple(game, stats, epsilon)
    return plan_refined(game, stats, epsilon)


def csp_from_document(doc: CSPDocument) -> CSPInstance:
    """Rebuild the predicates from the embedded game and check the listing agrees"""
    try:
        variant = Variant(doc.variant)
    except ValueError:
        raise SchemaError("/variant", f"unknown variant {doc.variant!r}")
    game = game_from_document(doc.game, prefix="/game")
    epsilon = parse_rational(doc.epsilon, "/epsilon")
    plan = make_plan(game, epsilon, variant)
    tree = None
    if doc.root is not None and validate_game(game).kind is GameKind.POLYMATRIX:
        tree = root_tree(game, doc.root)
    csp = build_csp(game, plan, epsilon, variant, tree)

    listed = [(v.name, v.lo, v.hi) for v in doc.variables]
    rebuilt = [(v.name, v.lo, v.hi) for v in csp.variables]
    if listed != rebuilt:
        raise PlanMismatch("variable listing does not match the rebuilt CSP")
    if [c.id for c in doc.constraints] != [c.cid for c in csp.constraints]:
        raise PlanMismatch("constraint listing does not match the rebuilt CSP")
    return csp


def parse_csp(text: str) -> CSPInstance:
    return csp_from_document(_validated(CSPDocument, _loads(text)))


def serialize_csp(csp: CSPInstance) -> str:
    return _dumps(csp_to_document(csp))


# ============ TABLE DUMP ============

class ArcDump(BaseModel):
    child: int
    parent: int
    pairs: List[List[int]]


class TableDump(BaseModel):
    schema_version: StrictInt = SCHEMA_VERSION
    root: int
    root_feasible: List[int]
    arcs: List[ArcDump]
    grid_denominators: Dict[str, int]
    table_bytes: int


def tables_to_document(tables, plan: DiscretizationPlan) -> TableDump:
    """Feasible (p_i, p_j) grid-index pairs of every arc plus the root table"""
    return TableDump(
        root=tables.root.child,
        root_feasible=[pair[0] for pair in tables.root.pairs()],
        arcs=[
            ArcDump(child=i, parent=table.parent, pairs=[list(pair) for pair in table.pairs()])
            for i, table in sorted(tables.arcs.items())
        ],
        grid_denominators={str(i): grid.s for i, grid in sorted(plan.grids.items())},
        table_bytes=tables.table_bytes,
    )


def serialize_tables(tables, plan: DiscretizationPlan) -> str:
    return _dumps(tables_to_document(tables, plan))


# ============ FILES ============

def read_text(path: Union[str, Path]) -> str:
    if str(path) == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError("/", f"cannot read {path}: {exc.strerror}")


def write_text(path: Optional[Union[str, Path]], text: str):
    """Write to a file, or to standard output when path is None or '-'"""
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    Path(path).write_text(text, encoding="utf-8")
    logger.info(f"wrote {path}")
