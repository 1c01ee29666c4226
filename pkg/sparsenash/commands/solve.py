"""
solve command: normalize, size, run a tree DP and certify
"""

import logging

from .. import config
from ..discretize import Variant
from ..documents import make_plan, serialize_profile, serialize_tables, write_text
from ..dp import SLACK_MODES, NormalFormTreeDP, collect_messages, solve_normalform_tree, solve_polymatrix_tree
from ..game import GameKind, as_normalform, classify, normalize, root_tree
from ..verify import exact_regret
from .common import add_game_argument, add_out_argument, children_order, epsilon_of, read_game

logger = logging.getLogger(__name__)


def add_parser(subparsers):
    parser = subparsers.add_parser(
        "solve", help="Compute a certified ε-MSNE of a tree game",
        description="Normalizes the game, sizes the grids, runs the tree DP and "
                    "checks the result with exact regrets.")
    add_game_argument(parser)
    parser.add_argument("--epsilon", "-e", required=True, help="Approximation target, e.g. 0.1 or 1/10")
    parser.add_argument("--variant", choices=[v.value for v in Variant], default=None,
                        help="Discretization (default: simple for polymatrix, refined otherwise)")
    parser.add_argument("--solver", choices=["polymatrix", "normalform"], default=None,
                        help="Tree DP (default: polymatrix when every clique has two members)")
    parser.add_argument("--root", type=int, default=config.DEFAULT_ROOT, help="Root player (default: %(default)s)")
    parser.add_argument("--children-order", default=None, metavar="<i:a,b;...>",
                        help="Child elimination order per node (default: ascending id)")
    parser.add_argument("--slack", choices=SLACK_MODES, default="proven",
                        help="Best-response slack (default: %(default)s)")
    parser.add_argument("--certify-original", action="store_true",
                        help="Also report regrets in the input payoff scale")
    parser.add_argument("--dump-tables", metavar="<file>", default=None,
                        help="Write the collection-pass tables as JSON")
    add_out_argument(parser, "profile")
    parser.set_defaults(handler=main)
    return parser


def main(args) -> int:
    original = read_game(args.game)
    epsilon = epsilon_of(args.epsilon)
    game = normalize(original)

    solver = args.solver or ("polymatrix" if classify(game) is GameKind.POLYMATRIX else "normalform")
    if solver == "normalform" and any(len(game.cliques_of(i)) != 1 for i in game.players):
        game = as_normalform(game)
    variant = args.variant or (Variant.SIMPLE.value if solver == "polymatrix" else Variant.REFINED.value)

    tree = root_tree(game, args.root, children_order(args.children_order))
    plan = make_plan(game, epsilon, variant)
    logger.info(f"{solver} DP, {variant} plan: s={plan.summary()['grid_denominators']}")

    if solver == "polymatrix":
        result = solve_polymatrix_tree(game, tree, plan, epsilon, slack=args.slack)
    else:
        result = solve_normalform_tree(game, tree, plan, epsilon, slack=args.slack)

    for line in result.report.lines():
        logger.info(line)
    if args.certify_original:
        for line in exact_regret(original, result.strategies, epsilon).lines():
            logger.info(f"input scale: {line}")

    if args.dump_tables:
        if solver == "polymatrix":
            tables = collect_messages(game, tree, plan, args.slack)
        else:
            tables = NormalFormTreeDP(game, tree, plan, args.slack).collect(full_root=True)
        write_text(args.dump_tables, serialize_tables(tables, plan))

    write_text(args.out, serialize_profile(result))
    return 0 if result.report.passed else 1
