"""
Command modules for sparsenash
"""

from . import bench, csp, generate, solve, verify

COMMANDS = [solve, verify, generate, csp, bench]

__all__ = ["COMMANDS"]
