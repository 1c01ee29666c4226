"""
bench command: star runtime scaling as CSV
"""

import json
import logging
import sys

from .. import config
from ..bench import bench_star, write_csv
from .common import epsilon_of, int_list

logger = logging.getLogger(__name__)


def add_parser(subparsers):
    parser = subparsers.add_parser("bench", help="Runtime benchmarks")
    targets = parser.add_subparsers(dest="bench_target", required=True)
    star = targets.add_parser("star", help="Matching-pennies stars with k leaves")
    star.add_argument("--sizes", default="10,25,50,100", help="Leaf counts, ascending (default: %(default)s)")
    star.add_argument("--epsilon", "-e", default="0.1")
    star.add_argument("--repeats", type=int, default=config.BENCH_REPEATS)
    star.add_argument("--out", "-o", default=None, metavar="<csv-file>",
                      help="CSV destination (default: standard output)")
    star.set_defaults(handler=main)
    return parser


def main(args) -> int:
    result = bench_star(int_list(args.sizes, "--sizes"), epsilon_of(args.epsilon), args.repeats)
    if args.out in (None, "-"):
        write_csv(result, sys.stdout)
        if result.slope is not None:
            logger.info(f"slope {result.slope:.4f}")
        return 0
    with open(args.out, "w", encoding="utf-8", newline="") as handle:
        write_csv(result, handle)
    logger.info(f"wrote {args.out}")
    sys.stdout.write(json.dumps({"slope": result.slope}) + "\n")
    return 0
