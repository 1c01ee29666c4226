"""
verify command: exact regret certificate of a profile document
"""

import json
import logging

from ..documents import format_rational, parse_profile, read_text, regret_entries, write_text
from ..game import normalize
from ..verify import exact_regret
from .common import add_game_argument, add_out_argument, epsilon_of, read_game

logger = logging.getLogger(__name__)


def add_parser(subparsers):
    parser = subparsers.add_parser(
        "verify", help="Check a profile with exact regrets",
        description="Recomputes every player's regret in exact arithmetic.")
    add_game_argument(parser)
    parser.add_argument("--profile", "-p", required=True, metavar="<profile-file>", help="Profile document")
    parser.add_argument("--epsilon", "-e", default=None,
                        help="Approximation target (default: the one stored in the profile)")
    parser.add_argument("--original", action="store_true",
                        help="Certify in the input payoff scale instead of the normalized game")
    add_out_argument(parser, "verdict")
    parser.set_defaults(handler=main)
    return parser


def main(args) -> int:
    original = read_game(args.game)
    game = original if args.original else normalize(original)
    profile, stored = parse_profile(read_text(args.profile))
    epsilon = epsilon_of(args.epsilon) if args.epsilon is not None else stored

    report = exact_regret(game, profile, epsilon)
    for (_, passed), line in zip(sorted(report.verdicts.items()), report.lines()):
        if passed:
            logger.info(line)
        else:
            logger.warning(line)

    verdict = {
        "epsilon": format_rational(epsilon),
        "passed": report.passed,
        "max_regret": format_rational(report.max_regret),
        "regrets": [entry.model_dump() for entry in regret_entries(report)],
    }
    write_text(args.out, json.dumps(verdict, indent=2) + "\n")
    return 0 if report.passed else 1
