"""
Configuration for sparsenash
Defaults come from the environment (.env supported)
"""

import logging
import os
import sys
from typing import Optional

from dotenv import load_dotenv

load_dotenv()

LOG_LEVEL = os.getenv("SPARSENASH_LOG_LEVEL", "INFO")
BRUTE_FORCE_CAP = int(os.getenv("SPARSENASH_BRUTE_FORCE_CAP", "1000000"))
NODE_LIMIT = int(os.getenv("SPARSENASH_NODE_LIMIT", "10000000"))
DEFAULT_ROOT = int(os.getenv("SPARSENASH_DEFAULT_ROOT", "0"))
BENCH_REPEATS = int(os.getenv("SPARSENASH_BENCH_REPEATS", "3"))

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def setup_logging(level: Optional[str] = None):
    """Configure root logging on stderr"""
    logging.basicConfig(
        level=getattr(logging, (level or LOG_LEVEL).upper(), logging.INFO),
        format=LOG_FORMAT,
        stream=sys.stderr,
    )
