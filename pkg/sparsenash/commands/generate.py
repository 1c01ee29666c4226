"""
generate command: instance generators as game documents
"""

import logging

from ..documents import serialize_game, write_text
from ..generators import (
    ORIENTATIONS,
    SHAPES,
    gen_example_player1,
    gen_mixed_clique_game,
    gen_random_tree_normalform,
    gen_random_tree_polymatrix,
    gen_star_matching_pennies,
)
from .common import add_out_argument, rational_pair

logger = logging.getLogger(__name__)


def add_parser(subparsers):
    parser = subparsers.add_parser("generate", help="Write a generated game document")
    kinds = parser.add_subparsers(dest="generator", required=True)

    star = kinds.add_parser("star-mp", help="Matching-pennies star with center 0")
    star.add_argument("--n", type=int, default=5, help="Number of players (default: %(default)s)")
    star.add_argument("--orientation", choices=ORIENTATIONS, default="split",
                      help="Who plays the matcher (default: %(default)s)")
    star.add_argument("--reward", default="1,0", help="Win and loss payoffs (default: %(default)s)")

    tree = kinds.add_parser("random-tree", help="Seeded random tree game")
    tree.add_argument("--n", type=int, default=5)
    tree.add_argument("--m", type=int, default=2)
    tree.add_argument("--kind", choices=["polymatrix", "normalform"], default="polymatrix")
    tree.add_argument("--shape", choices=SHAPES, default="random")
    tree.add_argument("--payoff-range", default="0,1", help="Payoff bounds (default: %(default)s)")
    tree.add_argument("--grid", type=int, default=10, help="Payoff steps inside the range (default: %(default)s)")

    example = kinds.add_parser("example1", help="Player-1 example with signed clique payoffs")
    example.add_argument("--b", default="1")
    example.add_argument("--c", default="1")
    example.add_argument("--gamma", default="0.1")

    mixed = kinds.add_parser("mixed-cliques", help="Five-player game with mixed clique sizes")
    mixed.add_argument("--m", type=int, default=2)

    for sub in (star, tree, example, mixed):
        sub.add_argument("--seed", type=int, default=0, help="Generator seed (default: %(default)s)")
        add_out_argument(sub, "game")
        sub.set_defaults(handler=main)
    return parser


def build(args):
    if args.generator == "star-mp":
        return gen_star_matching_pennies(args.n, args.orientation, rational_pair(args.reward))
    if args.generator == "random-tree":
        generate = gen_random_tree_polymatrix if args.kind == "polymatrix" else gen_random_tree_normalform
        return generate(args.n, args.m, args.seed, rational_pair(args.payoff_range), args.grid, args.shape)
    if args.generator == "example1":
        return gen_example_player1(args.b, args.c, args.gamma)
    return gen_mixed_clique_game(args.seed, args.m)


def main(args) -> int:
    game = build(args)
    logger.info(f"generated {game.metadata.get('name')}: {game.n} players, {len(game.cliques)} cliques")
    write_text(args.out, serialize_game(game))
    return 0
