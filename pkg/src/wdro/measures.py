"""Finitely supported probability measures on R^d."""
from __future__ import annotations

import io
import os
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.sparse import coo_matrix
from scipy.spatial import cKDTree

from .errors import DimensionMismatch, EmptySupport, InputError, MassNotOne, NegativeWeight

MERGE_TOL = 1e-12
INPUT_MASS_TOL = 1e-9
# renormalise only when further than this from 1; keeps make_measure idempotent
RENORM_TRIGGER = 1e-13


def as_points(points, dim: int | None = None) -> np.ndarray:
    """Coerce ``points`` to a float array of shape (n, d).

    Scalars are treated as 1-d points, a flat sequence as a list of 1-d points
    unless ``dim`` says otherwise.
    """
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1) if (dim is not None and dim > 1 and arr.size == dim) else arr.reshape(-1, 1)
    elif arr.ndim != 2:
        raise DimensionMismatch(f"points must be a 2-d array, got shape {arr.shape}")
    if dim is not None and arr.shape[1] != dim:
        raise DimensionMismatch(f"expected points of dimension {dim}, got {arr.shape[1]}")
    if arr.shape[1] < 1:
        raise DimensionMismatch("points must have dimension >= 1")
    if not np.all(np.isfinite(arr)):
        raise InputError("point coordinates must be finite")
    return arr


def _merge_groups(atoms: np.ndarray) -> np.ndarray:
    """Label atoms so that atoms within MERGE_TOL (sup-norm) share a label."""
    n = atoms.shape[0]
    if n < 2:
        return np.zeros(n, dtype=np.int64)
    pairs = cKDTree(atoms).query_pairs(MERGE_TOL, p=np.inf, output_type="ndarray")
    if len(pairs) == 0:
        return np.arange(n)
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    return labels


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Probability measure ``sum_i weights[i] * delta(atoms[i])``.

    Instances are canonical: atoms are sorted lexicographically, pairwise
    distinct and carry strictly positive weights summing to one. Build them
    with :func:`make_measure`.
    """

    atoms: np.ndarray
    weights: np.ndarray

    @property
    def dim(self) -> int:
        return self.atoms.shape[1]

    def __len__(self) -> int:
        return self.atoms.shape[0]

    def __repr__(self) -> str:
        return f"DiscreteMeasure(dim={self.dim}, n={len(self)})"

    def equals(self, other: "DiscreteMeasure", atol: float = 0.0) -> bool:
        """Same atoms (exactly) and weights within ``atol``."""
        return (
            self.atoms.shape == other.atoms.shape
            and np.array_equal(self.atoms, other.atoms)
            and np.allclose(self.weights, other.weights, rtol=0.0, atol=atol)
        )

    def mean(self) -> np.ndarray:
        return self.weights @ self.atoms


def make_measure(atoms, weights) -> DiscreteMeasure:
    """Validate and canonicalise a discrete probability measure.

    Duplicate atoms (closer than 1e-12 in sup-norm) are merged by summing
    their weights, zero-weight atoms are dropped and the result is sorted.
    """
    w = np.asarray(weights, dtype=np.float64).ravel()
    raw = np.asarray(atoms, dtype=np.float64)
    if raw.size == 0 or w.size == 0:
        raise EmptySupport("a measure needs at least one atom")
    if raw.ndim <= 1:
        raw = raw.reshape(-1, 1)
    pts = as_points(raw)
    if pts.shape[0] != w.size:
        raise DimensionMismatch(f"{pts.shape[0]} atoms but {w.size} weights")
    if not np.all(np.isfinite(w)):
        raise InputError("weights must be finite")
    if np.any(w < 0):
        raise NegativeWeight(f"negative weight {w.min()!r}")
    total = w.sum()
    if abs(total - 1.0) > INPUT_MASS_TOL:
        raise MassNotOne(f"weights sum to {total!r}, expected 1")

    labels = _merge_groups(pts)
    uniq, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    if uniq.size < pts.shape[0]:
        pts = pts[first]
        w = np.bincount(inverse.ravel(), weights=w, minlength=uniq.size)
    keep = w > 0
    pts, w = pts[keep], w[keep]
    if w.size == 0:
        raise EmptySupport("all weights are zero")
    order = np.lexsort(pts.T[::-1])
    pts, w = pts[order], w[order]
    total = w.sum()
    if abs(total - 1.0) > RENORM_TRIGGER:
        w = w / total
    pts.setflags(write=False)
    w.setflags(write=False)
    return DiscreteMeasure(pts, w)


def dirac(point) -> DiscreteMeasure:
    return make_measure(as_points(np.atleast_1d(point), dim=np.size(point)), [1.0])


def uniform(points) -> DiscreteMeasure:
    pts = as_points(points)
    return make_measure(pts, np.full(pts.shape[0], 1.0 / pts.shape[0]))


def mixture(parts: Iterable[tuple[float, DiscreteMeasure]]) -> DiscreteMeasure:
    """Convex combination built by concatenating scaled atom lists."""
    parts = list(parts)
    dims = {m.dim for _, m in parts}
    if len(dims) != 1:
        raise DimensionMismatch(f"mixture of measures with dimensions {sorted(dims)}")
    atoms = np.vstack([m.atoms for _, m in parts])
    weights = np.concatenate([alpha * m.weights for alpha, m in parts])
    return make_measure(atoms, weights)


@dataclass(frozen=True)
class PayoffSpec:
    """Bounded Lipschitz payoff ``V`` with declared constants.

    ``evaluator`` maps an (n, d) array of points to n values.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    lipschitz_K: float
    sup_bound_B: float
    name: str
    dim: int | None = None
    params: tuple = ()

    def __post_init__(self):
        if not (self.lipschitz_K >= 0 and np.isfinite(self.lipschitz_K)):
            raise InputError(f"Lipschitz constant must be finite and >= 0, got {self.lipschitz_K!r}")
        if not (self.sup_bound_B >= 0 and np.isfinite(self.sup_bound_B)):
            raise InputError(f"sup bound must be finite and >= 0, got {self.sup_bound_B!r}")

    def __call__(self, points) -> np.ndarray:
        pts = as_points(points, dim=self.dim)
        return np.asarray(self.evaluator(pts), dtype=np.float64).reshape(pts.shape[0])


def integrate(V: PayoffSpec, nu: DiscreteMeasure) -> float:
    """``sum_i w_i V(x_i)``."""
    if V.dim is not None and V.dim != nu.dim:
        raise DimensionMismatch(f"payoff {V.name} expects dimension {V.dim}, measure has {nu.dim}")
    return float(nu.weights @ V(nu.atoms))


def first_moment(mu: DiscreteMeasure) -> float:
    """``sum_i w_i ||x_i||_2``."""
    m = float(mu.weights @ np.linalg.norm(mu.atoms, axis=1))
    assert np.isfinite(m)
    return m


# ---------------------------------------------------------------------------
# text format: "dim=<d> n=<count>" then "w x1 ... xd" per atom
# ---------------------------------------------------------------------------

def dumps_measure(mu: DiscreteMeasure) -> str:
    lines = [f"dim={mu.dim} n={len(mu)}"]
    for w, x in zip(mu.weights, mu.atoms):
        lines.append(" ".join(repr(float(v)) for v in (w, *x)))
    return "\n".join(lines) + "\n"


def loads_measure(text: str) -> DiscreteMeasure:
    rows = [ln.strip() for ln in io.StringIO(text) if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise InputError("empty measure file")
    header = dict(tok.split("=", 1) for tok in rows[0].split())
    try:
        dim, n = int(header["dim"]), int(header["n"])
    except (KeyError, ValueError) as exc:
        raise InputError(f"bad measure header {rows[0]!r}") from exc
    body = rows[1:]
    if len(body) != n:
        raise InputError(f"header declares {n} atoms, found {len(body)}")
    data = np.array([[float(t) for t in r.split()] for r in body], dtype=np.float64).reshape(n, -1)
    if data.shape[1] != dim + 1:
        raise DimensionMismatch(f"rows must have {dim + 1} columns, found {data.shape[1]}")
    return make_measure(data[:, 1:], data[:, 0])


def save_measure(mu: DiscreteMeasure, path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_measure(mu))


def load_measure(path: str | os.PathLike) -> DiscreteMeasure:
    with open(path) as fh:
        return loads_measure(fh.read())
