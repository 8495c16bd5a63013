"""Robust minimisation over a W1 ball restricted to a finite support.

Solves ``min { int V dnu : supp(nu) in S, W1(nu, mu) <= theta }`` exactly.
The primal works on couplings ``pi`` with row sums ``mu`` and transport cost
at most ``theta``; the dual maximises

    g(lam) = -lam * theta + sum_i mu_i * min_{y in S} [V(y) + lam |x_i - y|]

over ``lam >= 0``. Both are computed by independent routines so one can
check the other.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from . import kernels
from .errors import DimensionMismatch, EmptySupport, InfeasibleInstance, InputError, NumericalFailure
from .measures import DiscreteMeasure, PayoffSpec, as_points, integrate, make_measure
from .payoffs import negated
from .transport import TransportPlan

FEAS_TOL = 1e-9
GOLDEN_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class RobustInstance:
    """One instance of the support-restricted robust problem.

    ``support`` must contain every atom of ``center`` (within 1e-12), which
    makes ``nu = center`` feasible.
    """

    payoff: PayoffSpec
    center: DiscreteMeasure
    radius: float
    support: np.ndarray

    def __post_init__(self):
        if not (self.radius >= 0 and math.isfinite(self.radius)):
            raise InputError(f"radius must be finite and >= 0, got {self.radius!r}")
        if np.size(self.support) == 0:
            raise EmptySupport("candidate support is empty")
        S = as_points(self.support, dim=self.center.dim)
        if self.payoff.dim is not None and self.payoff.dim != S.shape[1]:
            raise DimensionMismatch(f"payoff dimension {self.payoff.dim} vs support dimension {S.shape[1]}")
        S = np.unique(S, axis=0)
        dist, _ = cKDTree(S).query(self.center.atoms, p=np.inf)
        if np.any(dist > 1e-12):
            raise InputError("support must contain every atom of the center measure")
        S.setflags(write=False)
        object.__setattr__(self, "support", S)

    @property
    def dim(self) -> int:
        return self.center.dim


def with_center_atoms(support, center: DiscreteMeasure) -> np.ndarray:
    """Union of ``support`` and the atoms of ``center``."""
    S = as_points(support, dim=center.dim)
    return np.unique(np.vstack([S, center.atoms]), axis=0)


@dataclass(frozen=True, eq=False)
class Solution:
    """Optimum of a robust instance.

    ``coupling`` certifies feasibility (its cost is at most the radius); it
    need not be an optimal plan between its own marginals.
    """

    value: float
    minimizer: DiscreteMeasure
    coupling: TransportPlan
    dual_lambda: float = float("nan")
    dual_value: float = float("nan")
    gap: float = float("nan")

    def to_record(self) -> str:
        from .measures import dumps_measure

        lines = [
            f"value={self.value!r}",
            f"dual_lambda={self.dual_lambda!r}",
            f"dual_value={self.dual_value!r}",
            f"gap={self.gap!r}",
            "minimizer:",
            dumps_measure(self.minimizer).rstrip("\n"),
        ]
        return "\n".join(lines) + "\n"


def _data(instance: RobustInstance):
    C = cdist(instance.center.atoms, instance.support)
    V = instance.payoff(instance.support)
    return C, V, instance.center.weights


def _package(instance, C, V, flow, dual=None) -> Solution:
    col = flow.sum(axis=0)
    keep = col > 0
    minimizer = make_measure(instance.support[keep], col[keep])
    plan = TransportPlan(instance.center.atoms, instance.support, flow, float(np.sum(flow * C)))
    if plan.total_cost > instance.radius + FEAS_TOL:
        raise NumericalFailure(f"coupling cost {plan.total_cost} exceeds radius {instance.radius}")
    value = integrate(instance.payoff, minimizer)
    if dual is None:
        return Solution(value, minimizer, plan)
    lam, dval = dual
    return Solution(value, minimizer, plan, float(lam), float(dval), float(abs(value - dval)))


def _greedy_primal(C, V, mu, theta) -> np.ndarray:
    """Exact LP optimum by spending the budget on the steepest descents.

    Each source moves along its descent chain (lower hull of cost vs payoff);
    segments from all sources are bought in order of payoff drop per unit of
    transport cost, the last one fractionally.
    """
    n_src, m = C.shape
    offsets, verts = kernels.descent_chains(np.ascontiguousarray(C), np.ascontiguousarray(V))
    flow = np.zeros((n_src, m))
    start = verts[offsets[:-1]]
    rows = np.arange(n_src)
    budget = theta - float(mu @ C[rows, start])
    if budget < -FEAS_TOL:
        raise InfeasibleInstance("center atoms are not in the support")

    last = np.zeros(verts.size, dtype=bool)
    last[offsets[1:] - 1] = True
    k_tail = np.flatnonzero(~last)
    tail, head = verts[k_tail], verts[k_tail + 1]
    seg_src = np.repeat(rows, np.diff(offsets) - 1)
    dc = C[seg_src, head] - C[seg_src, tail]
    dv = V[head] - V[tail]
    slope = dv / dc
    # slopes rise along each chain; repair rounding so prefixes stay consistent
    for i in range(n_src):
        lo, hi = offsets[i] - i, offsets[i + 1] - i - 1
        slope[lo:hi] = np.maximum.accumulate(slope[lo:hi])
    order = np.lexsort((np.arange(slope.size), slope))
    spend = mu[seg_src[order]] * dc[order]
    cum = np.cumsum(spend)
    n_full = int(np.searchsorted(cum, max(budget, 0.0), side="right"))

    taken = np.zeros(n_src, dtype=np.int64)
    np.add.at(taken, seg_src[order[:n_full]], 1)
    frac = np.zeros(n_src)
    if n_full < order.size:
        k = order[n_full]
        left = budget - (cum[n_full - 1] if n_full else 0.0)
        frac[seg_src[k]] = min(max(left / spend[n_full], 0.0), 1.0)
    pos = offsets[:-1] + taken
    flow[rows, verts[pos]] += (1.0 - frac) * mu
    part = frac > 0
    flow[rows[part], verts[pos[part] + 1]] += frac[part] * mu[part]
    return flow


def _highs_primal(C, V, mu, theta) -> np.ndarray:
    from scipy.optimize import linprog
    from scipy.sparse import csr_matrix, kron, identity

    n_src, m = C.shape
    A_eq = csr_matrix(kron(identity(n_src), np.ones((1, m))))
    res = linprog(
        np.tile(V, n_src),
        A_ub=C.reshape(1, -1),
        b_ub=[theta],
        A_eq=A_eq,
        b_eq=mu,
        bounds=(0, None),
        method="highs",
        options={"primal_feasibility_tolerance": 1e-9, "dual_feasibility_tolerance": 1e-9},
    )
    if res.status != 0:
        raise NumericalFailure(f"HiGHS failed: {res.message}")
    return np.maximum(res.x.reshape(n_src, m), 0.0)


def solve_primal(instance: RobustInstance, with_dual: bool = True, method: str = "greedy") -> Solution:
    """Optimal value and minimiser of the coupling LP.

    ``method`` is ``"greedy"`` (exact descent-chain algorithm) or ``"highs"``
    (scipy's HiGHS simplex, for cross-checks).
    """
    C, V, mu = _data(instance)
    if instance.radius == 0.0:
        # the ball is {center}; skip the degenerate LP
        flow = np.zeros(C.shape)
        flow[np.arange(C.shape[0]), np.argmin(C, axis=1)] = mu
        plan = TransportPlan(instance.center.atoms, instance.support, flow, float(np.sum(flow * C)))
        value = integrate(instance.payoff, instance.center)
        if with_dual:
            return Solution(value, instance.center, plan, instance.payoff.lipschitz_K, value, 0.0)
        return Solution(value, instance.center, plan)
    if method == "greedy":
        flow = _greedy_primal(C, V, mu, instance.radius)
    elif method == "highs":
        flow = _highs_primal(C, V, mu, instance.radius)
    else:
        raise ValueError(f"unknown method {method!r}")
    dual = solve_dual(instance) if with_dual else None
    return _package(instance, C, V, flow, dual)


def _dual_objective(C, V, mu, theta):
    def g(lam):
        return -lam * theta + float(mu @ kernels.c_transform(C, V, lam))
    return g


def solve_dual(instance: RobustInstance, method: str = "breakpoints") -> tuple[float, float]:
    """``(lam*, max_lam g(lam))`` for the lambda-c-transform dual.

    ``g`` is concave and piecewise linear with kinks at the envelope
    breakpoints, so the maximum over ``[0, K]`` sits at one of them; a binary
    search on the sorted candidates finds it. ``method="golden"`` runs a
    golden-section search on ``[0, K]`` instead.
    """
    C, V, mu = _data(instance)
    C = np.ascontiguousarray(C)
    V = np.ascontiguousarray(V)
    theta = instance.radius
    K = instance.payoff.lipschitz_K
    g = _dual_objective(C, V, mu, theta)
    if K == 0.0 or theta == 0.0:
        lam = K if theta == 0.0 else 0.0
        return float(lam), float(g(lam))
    if method == "golden":
        return _golden_max(g, 0.0, K)
    if method != "breakpoints":
        raise ValueError(f"unknown method {method!r}")

    cand = np.unique(np.concatenate(([0.0, K], kernels.envelope_breakpoints(C, V, K))))
    cand = cand[cand <= K]
    # rows often share a kink up to rounding; near-equal candidates would
    # create false flat steps for the search below
    keep = np.ones(cand.size, dtype=bool)
    keep[1:] = np.diff(cand) > 1e-12 * np.maximum(1.0, cand[1:])
    cand = cand[keep]
    cache = {}

    def val(k):
        if k not in cache:
            cache[k] = g(cand[k])
        return cache[k]

    lo, hi = 0, cand.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if val(mid) < val(mid + 1):
            lo = mid + 1
        else:
            hi = mid
    best = max(range(max(lo - 1, 0), min(lo + 2, cand.size)), key=val)
    value = val(best)
    if not math.isfinite(value):
        raise NumericalFailure("dual objective is not finite")
    return float(cand[best]), float(value)


def _golden_max(g, a, b, tol=GOLDEN_TOL, max_iter=500):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    gc, gd = g(c), g(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if gc >= gd:
            b, d, gd = d, c, gc
            c = b - invphi * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + invphi * (b - a)
            gd = g(d)
    else:
        raise NumericalFailure("golden-section search did not converge")
    pts = [(g(0.0), 0.0), (gc, c), (gd, d), (g(b), b)]
    val, lam = max(pts)
    return float(lam), float(val)


def lambda_c_transform(V: PayoffSpec, lam: float, x, support) -> float:
    """``min_{y in support} V(y) + lam * |x - y|``."""
    S = np.asarray(support, dtype=np.float64)
    if S.size == 0:
        raise EmptySupport("support is empty")
    S = as_points(S, dim=V.dim)
    pt = as_points(np.atleast_1d(x), dim=S.shape[1])
    C = np.ascontiguousarray(cdist(pt, S))
    return float(kernels.c_transform(C, np.ascontiguousarray(V(S)), float(lam))[0])


def lipschitz_bounds(instance: RobustInstance) -> tuple[float, float]:
    """``(F(mu) - K theta, F(mu))``, an interval holding the optimum."""
    F = integrate(instance.payoff, instance.center)
    return F - instance.payoff.lipschitz_K * instance.radius, F


def solve_robust_max(instance: RobustInstance, with_dual: bool = True) -> Solution:
    """Worst case from above: maximise ``int V dnu`` over the same ball."""
    flipped = RobustInstance(negated(instance.payoff), instance.center, instance.radius, instance.support)
    sol = solve_primal(flipped, with_dual=with_dual)
    return Solution(-sol.value, sol.minimizer, sol.coupling, sol.dual_lambda, -sol.dual_value, sol.gap)
