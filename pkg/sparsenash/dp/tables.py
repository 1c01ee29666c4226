"""
Message tables for the tree solvers
Feasibility tables over grid indices, witness tables, shift-reduced
partial-sum sets and the solver result type
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Hashable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import signal, sparse

from ..discretize import GridMixedStrategy
from ..verify import RegretReport


@dataclass
class FeasibilityTable:
    """T_{i→j}: feasible (p_i, p_j) grid-index pairs in a sparse CSC matrix.

    Rows are child grid indices and columns parent grid indices; only
    feasible pairs are stored. The root table has a single column.
    """
    child: int
    parent: Optional[int]
    cells: sparse.csc_matrix

    @classmethod
    def from_rows(
        cls, child: int, parent: Optional[int], rows: Sequence[np.ndarray], width: int
    ) -> "FeasibilityTable":
        """rows[g] lists the parent indices feasible with child index g"""
        counts = [len(r) for r in rows]
        row_index = np.repeat(np.arange(len(rows), dtype=np.int64), counts)
        col_index = np.concatenate([np.asarray(r, dtype=np.int64) for r in rows]) if rows else row_index
        cells = sparse.csc_matrix(
            (np.ones(len(row_index), dtype=bool), (row_index, col_index)),
            shape=(len(rows), width),
        )
        cells.sort_indices()
        return cls(child, parent, cells)

    @classmethod
    def root_table(cls, child: int, feasible: Sequence[int], size: int) -> "FeasibilityTable":
        rows = [np.zeros(0, dtype=np.int64) for _ in range(size)]
        for g in feasible:
            rows[g] = np.zeros(1, dtype=np.int64)
        return cls.from_rows(child, None, rows, 1)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.cells.shape

    @property
    def count(self) -> int:
        return int(self.cells.nnz)

    def feasible(self, g: int, h: int = 0) -> bool:
        column = self.choices(h)
        at = np.searchsorted(column, g)
        return bool(at < len(column) and column[at] == g)

    def choices(self, parent_index: int = 0) -> np.ndarray:
        """Child grid indices feasible against one parent strategy, ascending"""
        start, end = self.cells.indptr[parent_index], self.cells.indptr[parent_index + 1]
        return self.cells.indices[start:end]

    def pairs(self) -> List[Tuple[int, ...]]:
        """Feasible keys in (g, h) order; root keys are 1-tuples"""
        coo = self.cells.tocoo()
        order = np.lexsort((coo.col, coo.row))
        if self.parent is None:
            return [(int(coo.row[k]),) for k in order]
        return [(int(coo.row[k]), int(coo.col[k])) for k in order]

    @property
    def nbytes(self) -> int:
        return int(self.cells.data.nbytes + self.cells.indices.nbytes + self.cells.indptr.nbytes)


@dataclass
class WitnessTable:
    """Sparse key -> witness map; the first witness recorded for a key wins"""
    cells: Dict[Hashable, Tuple] = field(default_factory=dict)

    def record(self, key: Hashable, witness: Tuple) -> bool:
        if key in self.cells:
            return False
        self.cells[key] = witness
        return True

    def __len__(self) -> int:
        return len(self.cells)


@dataclass
class SumsetMask:
    """Set of integer vectors held as a boolean box anchored at `origin`"""
    origin: np.ndarray
    mask: np.ndarray

    @classmethod
    def zero(cls, dim: int) -> "SumsetMask":
        return cls(np.zeros(dim, dtype=np.int64), np.ones((1,) * dim, dtype=bool))

    @classmethod
    def empty(cls, dim: int) -> "SumsetMask":
        return cls(np.zeros(dim, dtype=np.int64), np.zeros((0,) * dim, dtype=bool))

    @property
    def dim(self) -> int:
        return len(self.origin)

    @property
    def is_empty(self) -> bool:
        return not self.mask.any()

    @property
    def nbytes(self) -> int:
        return int(self.mask.nbytes)

    def __len__(self) -> int:
        return int(self.mask.sum())

    def points(self) -> np.ndarray:
        """Members in lexicographic order"""
        return np.argwhere(self.mask) + self.origin

    def contains(self, vector) -> bool:
        offset = np.asarray(vector, dtype=np.int64) - self.origin
        if (offset < 0).any() or (offset >= self.mask.shape).any():
            return False
        return bool(self.mask[tuple(offset)])

    def trimmed(self) -> "SumsetMask":
        hits = np.argwhere(self.mask)
        if not len(hits):
            return SumsetMask.empty(self.dim)
        lo, hi = hits.min(axis=0), hits.max(axis=0)
        box = tuple(slice(a, b + 1) for a, b in zip(lo, hi))
        return SumsetMask(self.origin + lo, self.mask[box])

    def minkowski(self, deltas: np.ndarray) -> "SumsetMask":
        """{x + d : x in self, d in deltas}"""
        if self.is_empty or not len(deltas):
            return SumsetMask.empty(self.dim)
        lo = deltas.min(axis=0)
        kernel = np.zeros(tuple(deltas.max(axis=0) - lo + 1), dtype=np.int64)
        kernel[tuple((deltas - lo).T)] = 1
        counts = signal.convolve(self.mask.astype(np.int64), kernel, mode="full")
        return SumsetMask(self.origin + lo, counts > 0).trimmed()


@dataclass
class MessageTables:
    """Output of a collection pass"""
    arcs: Dict[int, FeasibilityTable]
    root: FeasibilityTable
    sum_bytes: int = 0

    @property
    def table_bytes(self) -> int:
        return sum(t.nbytes for t in self.arcs.values()) + self.root.nbytes + self.sum_bytes


@dataclass
class EquilibriumProfile:
    strategies: Dict[int, GridMixedStrategy]
    epsilon: Fraction
    plan: Dict[str, Any]
    root: int
    slack: str
    solver: str
    partial_sums: Dict[int, Tuple[int, ...]] = field(default_factory=dict)
    report: Optional[RegretReport] = None
    stats: Dict[str, Any] = field(default_factory=dict)

    @property
    def verified(self) -> bool:
        return self.report is not None and self.report.passed
