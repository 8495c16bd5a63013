"""Dyadic box partitions and projection of measures onto them."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AtomOutsideBox, DimensionMismatch, InputError, LevelOverflow
from .measures import DiscreteMeasure, as_points, make_measure

DEFAULT_MAX_LEVEL = 24


@dataclass(frozen=True, eq=False)
class Box:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=np.float64).ravel()
        hi = np.asarray(self.upper, dtype=np.float64).ravel()
        if lo.shape != hi.shape or lo.size == 0:
            raise DimensionMismatch("box bounds must have equal, nonzero dimension")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise InputError("box bounds must be finite")
        if np.any(hi <= lo):
            raise InputError(f"box needs lower < upper on every axis, got {lo} / {hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def from_intervals(cls, intervals) -> "Box":
        """``[[lo, hi], ...]`` as written in config files."""
        arr = np.asarray(intervals, dtype=np.float64).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1])

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def sides(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, points) -> np.ndarray:
        pts = as_points(points, dim=self.dim)
        return np.all((pts >= self.lower) & (pts <= self.upper), axis=1)


@dataclass(frozen=True, eq=False)
class DyadicFiltration:
    """Level-``n`` dyadic partition of ``box`` into ``2**(n*d)`` cells.

    Cells are half-open ``[lo, hi)`` along each axis except the last cell,
    which also contains the upper face; cell representatives are centres.
    """

    box: Box
    level: int = 0
    max_level: int = DEFAULT_MAX_LEVEL

    def __post_init__(self):
        if self.level < 0:
            raise InputError("filtration level must be >= 0")
        if self.level > self.max_level:
            raise LevelOverflow(f"level {self.level} exceeds maximum {self.max_level}")

    @property
    def dim(self) -> int:
        return self.box.dim

    @property
    def cells_per_axis(self) -> int:
        return 2**self.level

    @property
    def n_cells(self) -> int:
        return self.cells_per_axis**self.dim

    def cell_sides(self) -> np.ndarray:
        return self.box.sides / self.cells_per_axis

    def cell_index(self, points) -> np.ndarray:
        """Integer cell coordinates, shape (n, d)."""
        pts = as_points(points, dim=self.dim)
        inside = self.box.contains(pts)
        if not np.all(inside):
            bad = pts[np.argmin(inside)]
            raise AtomOutsideBox(bad, self.box.lower, self.box.upper)
        scaled = (pts - self.box.lower) / self.box.sides * self.cells_per_axis
        return np.minimum(np.floor(scaled).astype(np.int64), self.cells_per_axis - 1)

    def centers_of(self, index: np.ndarray) -> np.ndarray:
        return self.box.lower + (index + 0.5) * self.box.sides / self.cells_per_axis

    def centers(self) -> np.ndarray:
        """All cell centres in lexicographic order, shape (2**(n*d), d)."""
        k = np.arange(self.cells_per_axis)
        grid = np.stack(np.meshgrid(*([k] * self.dim), indexing="ij"), axis=-1).reshape(-1, self.dim)
        return self.centers_of(grid)

    def cell_bounds(self, index: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        side = self.box.sides / self.cells_per_axis
        return self.box.lower + index * side, self.box.lower + (index + 1) * side


def refine(F: DyadicFiltration) -> DyadicFiltration:
    return DyadicFiltration(F.box, F.level + 1, F.max_level)


def mesh(F: DyadicFiltration) -> float:
    """Largest cell side ``max_k (upper_k - lower_k) / 2**n``."""
    return float(np.max(F.cell_sides()))


def projection_bound(F: DyadicFiltration) -> float:
    """A-priori bound ``sqrt(d)/2 * mesh`` on ``W1(project(mu, F), mu)``."""
    return math.sqrt(F.dim) / 2.0 * mesh(F)


def project(mu: DiscreteMeasure, F: DyadicFiltration) -> DiscreteMeasure:
    """Move every atom's mass to the centre of its cell."""
    if mu.dim != F.dim:
        raise DimensionMismatch(f"measure dimension {mu.dim} vs filtration dimension {F.dim}")
    idx = F.cell_index(mu.atoms)
    cells, inverse = np.unique(idx, axis=0, return_inverse=True)
    mass = np.bincount(inverse.ravel(), weights=mu.weights, minlength=cells.shape[0])
    return make_measure(F.centers_of(cells), mass)
