"""
Main entry point for sparsenash
Approximate Nash equilibria of sparse graphical games on trees
"""

import argparse
import logging
import sys
from typing import List, Optional

from .commands import COMMANDS
from .config import setup_logging
from .errors import SparseNashError

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsenash",
        description="Sparse discretization and tree DP for ε-Nash equilibria of graphical games.")
    parser.add_argument("--log-level", default=None, help="Logging level (default: SPARSENASH_LOG_LEVEL or INFO)")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.add_parser(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Run one command; returns its exit code"""
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    try:
        return args.handler(args)
    except SparseNashError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code


cli = main


if __name__ == "__main__":
    sys.exit(main())
