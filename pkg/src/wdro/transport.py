"""Exact 1-Wasserstein distances, optimal plans and dual potentials."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from . import kernels
from .errors import DimensionMismatch, NumericalFailure
from .measures import DiscreteMeasure, make_measure

MAX_PIVOTS = 1_000_000


@dataclass(frozen=True, eq=False)
class TransportPlan:
    """Coupling between two atom lists; rows are sources, columns targets."""

    source_atoms: np.ndarray
    target_atoms: np.ndarray
    flow: np.ndarray
    total_cost: float

    def cost_matrix(self) -> np.ndarray:
        return cdist(self.source_atoms, self.target_atoms)

    def to_csv(self) -> str:
        """``i,j,flow,cost`` rows for every positive entry."""
        C = self.cost_matrix()
        lines = ["i,j,flow,cost"]
        for i, j in zip(*np.nonzero(self.flow)):
            lines.append(f"{i},{j},{float(self.flow[i, j])!r},{float(C[i, j])!r}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class DualPotential:
    """1-Lipschitz function tabulated on the union of two supports."""

    atoms: np.ndarray
    values: np.ndarray

    def __call__(self, mu: DiscreteMeasure) -> np.ndarray:
        """Values at the atoms of ``mu`` (which must lie in ``self.atoms``)."""
        idx = _locate(self.atoms, mu.atoms)
        return self.values[idx]

    def integrate(self, mu: DiscreteMeasure) -> float:
        return float(mu.weights @ self(mu))


def _locate(table: np.ndarray, points: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    D = cdist(points, table, metric="chebyshev")
    idx = D.argmin(axis=1)
    if np.any(D[np.arange(len(idx)), idx] > tol):
        raise DimensionMismatch("point not found in potential support")
    return idx


def _check_dims(rho: DiscreteMeasure, sigma: DiscreteMeasure) -> None:
    if rho.dim != sigma.dim:
        raise DimensionMismatch(f"measures live in dimensions {rho.dim} and {sigma.dim}")


def solve_transport(a: np.ndarray, b: np.ndarray, C: np.ndarray):
    """Exact transport LP. Returns ``(flow, u, v)`` with ``u_i + v_j <= C_ij``.

    The supply/demand totals are matched exactly before pivoting.
    """
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64) * (a.sum() / b.sum())
    C = np.ascontiguousarray(C, dtype=np.float64)
    tol = 1e-12 * max(1.0, float(C.max(initial=0.0)))
    br, bc, bx, u, v, status, _ = kernels.transport_simplex(a, b, C, tol, MAX_PIVOTS)
    if status != kernels.OPTIMAL:
        raise NumericalFailure(f"transport simplex hit the {MAX_PIVOTS} pivot cap")
    flow = np.zeros(C.shape)
    np.add.at(flow, (br, bc), bx)
    return flow, u, v


def _transport(rho: DiscreteMeasure, sigma: DiscreteMeasure):
    _check_dims(rho, sigma)
    C = cdist(rho.atoms, sigma.atoms)
    flow, u, v = solve_transport(rho.weights, sigma.weights, C)
    plan = TransportPlan(rho.atoms, sigma.atoms, flow, float(np.sum(flow * C)))
    return plan, u, v


def w1_distance(rho: DiscreteMeasure, sigma: DiscreteMeasure) -> tuple[float, TransportPlan]:
    """Exact W1 between two discrete measures, with an optimal plan."""
    plan, _, _ = _transport(rho, sigma)
    return plan.total_cost, plan


def w1_1d(rho: DiscreteMeasure, sigma: DiscreteMeasure) -> float:
    """W1 on the line via the quantile coupling.

    Integrates ``|F_rho^-1(t) - F_sigma^-1(t)|`` over ``t`` exactly, the
    quantile functions being piecewise constant between cumulative weights.
    """
    if rho.dim != 1 or sigma.dim != 1:
        raise DimensionMismatch("w1_1d needs one-dimensional measures")
    # canonical measures are sorted already
    xr, wr = rho.atoms[:, 0], rho.weights
    xs, ws = sigma.atoms[:, 0], sigma.weights
    cr = np.cumsum(wr)
    cs = np.cumsum(ws)
    cr[-1] = cs[-1] = 1.0
    t = np.unique(np.concatenate(([0.0], cr, cs)))
    mid = 0.5 * (t[:-1] + t[1:])
    qr = xr[np.minimum(np.searchsorted(cr, mid), xr.size - 1)]
    qs = xs[np.minimum(np.searchsorted(cs, mid), xs.size - 1)]
    return float(np.sum(np.diff(t) * np.abs(qr - qs)))


def kr_dual_potential(rho: DiscreteMeasure, sigma: DiscreteMeasure) -> DualPotential:
    """Kantorovich-Rubinstein witness ``f`` with ``int f drho - int f dsigma = W1``.

    The LP duals give ``f = u`` on the source atoms and ``f = -v`` on the
    targets. The envelope ``f(z) = min_j (f(y_j) + |z - y_j|)`` over target
    atoms then makes ``f`` 1-Lipschitz on the union support without changing
    either integral.
    """
    _, u, v = _transport(rho, sigma)
    union = make_measure(
        np.vstack([rho.atoms, sigma.atoms]),
        np.concatenate([rho.weights, sigma.weights]) / 2.0,
    ).atoms
    values = np.min(-v[None, :] + cdist(union, sigma.atoms), axis=1)
    return DualPotential(union, values)
