"""
Runtime benchmark for sparsenash
Times the polymatrix DP on matching-pennies stars and fits a log-log slope
"""

import csv
import logging
import time
from dataclasses import dataclass, field
from typing import IO, List, Optional, Sequence

import numpy as np

from . import config
from .discretize import plan_simple
from .dp import solve_polymatrix_tree
from .errors import ParameterOutOfRange
from .game import normalize_polymatrix, root_tree, validate_game
from .generators import gen_star_matching_pennies

logger = logging.getLogger(__name__)

CSV_HEADER = ("k", "median_seconds", "s_leaf", "s_center", "table_bytes")


@dataclass(frozen=True)
class BenchRow:
    k: int
    median_seconds: float
    s_leaf: int
    s_center: int
    table_bytes: int
    timings: Sequence[float] = ()

    def as_csv(self) -> List:
        return [self.k, f"{self.median_seconds:.6f}", self.s_leaf, self.s_center, self.table_bytes]


@dataclass
class BenchResult:
    rows: List[BenchRow] = field(default_factory=list)
    slope: Optional[float] = None


def fit_slope(ks: Sequence[int], seconds: Sequence[float]) -> Optional[float]:
    """Least-squares slope of log(seconds) against log(k); None below two sizes"""
    if len(ks) < 2:
        return None
    slope, _ = np.polyfit(np.log(np.asarray(ks, dtype=float)),
                          np.log(np.maximum(np.asarray(seconds, dtype=float), 1e-9)), 1)
    return float(slope)


def bench_star(sizes: Sequence[int], epsilon, repeats: Optional[int] = None) -> BenchResult:
    """Median solve time per star with k leaves (n = k + 1)"""
    sizes = [int(k) for k in sizes]
    if sizes != sorted(sizes) or not sizes or sizes[0] < 1:
        raise ParameterOutOfRange(f"sizes must be positive and ascending, got {sizes}")
    repeats = repeats if repeats is not None else config.BENCH_REPEATS
    if repeats < 1:
        raise ParameterOutOfRange(f"repeats must be positive, got {repeats}")

    result = BenchResult()
    for k in sizes:
        game = normalize_polymatrix(gen_star_matching_pennies(k + 1))
        timings, table_bytes, plan = [], 0, None
        for _ in range(repeats):
            started = time.perf_counter()
            plan = plan_simple(game, validate_game(game), epsilon)
            solved = solve_polymatrix_tree(game, root_tree(game, 0), plan, epsilon)
            timings.append(time.perf_counter() - started)
            table_bytes = solved.stats["table_bytes"]
        row = BenchRow(k, float(np.median(timings)), plan.s(1), plan.s(0), table_bytes, tuple(timings))
        logger.info(f"star k={k}: median {row.median_seconds:.3f}s, s_leaf={row.s_leaf}, s_center={row.s_center}")
        result.rows.append(row)

    result.slope = fit_slope([r.k for r in result.rows], [r.median_seconds for r in result.rows])
    if result.slope is not None:
        logger.info(f"log-log runtime slope {result.slope:.3f}")
    return result


def write_csv(result: BenchResult, handle: IO[str]):
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in result.rows:
        writer.writerow(row.as_csv())
