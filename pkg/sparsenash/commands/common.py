"""
Shared argument helpers for sparsenash commands
"""

import logging
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from ..discretize import positive_epsilon
from ..documents import parse_game, read_text
from ..errors import SchemaError
from ..game import GameDefinition, to_rational

logger = logging.getLogger(__name__)


def add_game_argument(parser):
    parser.add_argument("--game", "-g", metavar="<game-file>", required=True,
                        help="Game document (JSON); '-' reads standard input")


def add_out_argument(parser, what: str = "output"):
    parser.add_argument("--out", "-o", metavar="<file>", default=None,
                        help=f"Where to write the {what} (default: standard output)")


def read_game(path: str) -> GameDefinition:
    game = parse_game(read_text(path))
    logger.info(f"loaded {path}: {game.n} players, {len(game.cliques)} cliques")
    return game


def epsilon_of(text: str) -> Fraction:
    try:
        return positive_epsilon(text)
    except (ValueError, ZeroDivisionError):
        raise SchemaError("--epsilon", f"{text!r} is not a rational number")


def rational_pair(text: str) -> Tuple[Fraction, Fraction]:
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != 2:
        raise SchemaError("--reward", f"expected two comma-separated values, got {text!r}")
    return to_rational(parts[0]), to_rational(parts[1])


def int_list(text: str, option: str) -> List[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise SchemaError(option, f"expected comma-separated integers, got {text!r}")


def children_order(text: Optional[str]) -> Optional[Dict[int, List[int]]]:
    """'0:2,1;2:3' -> {0: [2, 1], 2: [3]}"""
    if not text:
        return None
    order = {}
    for part in text.split(";"):
        if not part.strip():
            continue
        node, _, kids = part.partition(":")
        try:
            order[int(node)] = int_list(kids, "--children-order")
        except ValueError:
            raise SchemaError("--children-order", f"bad entry {part!r}")
    return order
