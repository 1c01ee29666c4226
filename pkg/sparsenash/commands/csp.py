"""
csp command: export the game-induced CSP and solve exported instances
"""

import logging

from .. import config
from ..csp import build_csp, solve_backtracking
from ..discretize import Variant
from ..documents import make_plan, parse_csp, read_text, serialize_csp, serialize_profile, write_text
from ..dp import EquilibriumProfile
from ..errors import NodeLimitExceeded
from ..game import GameKind, classify, normalize, root_tree
from ..verify import exact_regret
from .common import add_game_argument, add_out_argument, epsilon_of, read_game

logger = logging.getLogger(__name__)


def add_parser(subparsers):
    parser = subparsers.add_parser("csp", help="Export or solve the game-induced CSP")
    actions = parser.add_subparsers(dest="csp_action", required=True)

    export = actions.add_parser("export", help="Write the CSP of a normalized game")
    add_game_argument(export)
    export.add_argument("--epsilon", "-e", required=True)
    export.add_argument("--variant", choices=[v.value for v in Variant], default=Variant.SIMPLE.value)
    export.add_argument("--root", type=int, default=config.DEFAULT_ROOT)
    add_out_argument(export, "CSP document")
    export.set_defaults(handler=export_main)

    solve = actions.add_parser("solve", help="Backtracking search over an exported CSP")
    solve.add_argument("--csp", required=True, metavar="<csp-file>")
    solve.add_argument("--node-limit", type=int, default=config.NODE_LIMIT,
                       help="Search node limit (default: %(default)s)")
    add_out_argument(solve, "profile")
    solve.set_defaults(handler=solve_main)
    return parser


def export_main(args) -> int:
    game = normalize(read_game(args.game))
    epsilon = epsilon_of(args.epsilon)
    plan = make_plan(game, epsilon, args.variant)
    tree = root_tree(game, args.root) if classify(game) is GameKind.POLYMATRIX else None
    write_text(args.out, serialize_csp(build_csp(game, plan, epsilon, args.variant, tree)))
    return 0


def solve_main(args) -> int:
    csp = parse_csp(read_text(args.csp))
    result = solve_backtracking(csp, args.node_limit)
    logger.info(f"backtracking: {result.status} after {result.nodes} nodes")
    if result.status == "limit_exceeded":
        raise NodeLimitExceeded(f"no answer within {args.node_limit} nodes")
    if result.status == "infeasible":
        logger.warning("CSP has no solution")
        return 1

    strategies = csp.profile(result.assignment)
    report = exact_regret(csp.game, strategies, csp.epsilon)
    profile = EquilibriumProfile(
        strategies=strategies,
        epsilon=csp.epsilon,
        plan=csp.plan.summary(),
        root=csp.root if csp.root is not None else 0,
        slack="proven",
        solver="backtracking",
        report=report,
        stats={"nodes": result.nodes},
    )
    write_text(args.out, serialize_profile(profile))
    return 0 if report.passed else 1
