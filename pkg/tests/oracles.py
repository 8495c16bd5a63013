"""Reference computations that share no code path with the library solvers."""
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def _compositions(k: int, total: int) -> np.ndarray:
    """Integer vectors of length k, entries >= 0, summing to ``total``."""
    if k == 1:
        return np.array([[total]])
    parts = []
    for first in range(total + 1):
        rest = _compositions(k - 1, total - first)
        parts.append(np.column_stack([np.full(len(rest), first), rest]))
    return np.vstack(parts)


@lru_cache(maxsize=None)
def simplex_grid(k: int, steps: int) -> np.ndarray:
    """All weight vectors of length k with entries in {0, 1/steps, ..., 1}."""
    out = _compositions(k, steps) / steps
    out.setflags(write=False)
    return out


def w1_line_many(nu_w: np.ndarray, nu_x: np.ndarray, mu_w: np.ndarray, mu_x: np.ndarray) -> np.ndarray:
    """W1 on the line between each row of ``nu_w`` (on ``nu_x``) and ``mu``.

    Uses ``int |F_nu(x) - F_mu(x)| dx`` on the merged breakpoints.
    """
    pts = np.unique(np.concatenate([nu_x, mu_x]))
    left = pts[:-1]
    # F(x) on [left_l, left_{l+1}) = mass at atoms <= left_l
    ind_nu = (nu_x[:, None] <= left[None, :]).astype(float)
    ind_mu = (mu_x[:, None] <= left[None, :]).astype(float)
    F_nu = nu_w @ ind_nu
    F_mu = mu_w @ ind_mu
    return np.abs(F_nu - F_mu[None, :]) @ np.diff(pts)


def w1_two_sources_many(nu_w: np.ndarray, nu_x: np.ndarray, mu_w: np.ndarray, mu_x: np.ndarray) -> np.ndarray:
    """W1 to a centre with at most two atoms, any dimension.

    With sources a, b the transport problem is a fractional knapsack: send
    mass to a in increasing order of ``c_a - c_b``.
    """
    ca = np.linalg.norm(nu_x - mu_x[0], axis=1)
    if len(mu_w) == 1:
        return nu_w @ ca
    cb = np.linalg.norm(nu_x - mu_x[1], axis=1)
    order = np.argsort(ca - cb, kind="stable")
    w = nu_w[:, order]
    before = np.cumsum(w, axis=1) - w
    t = np.clip(mu_w[0] - before, 0.0, w)
    return (w - t) @ cb[order] + t @ ca[order]


def brute_force_robust_min(V_vals, support, mu_w, mu_x, theta, steps=200):
    """Minimum of ``nu @ V`` over grid measures on ``support`` within W1 radius."""
    grid = simplex_grid(len(support), steps)
    if support.shape[1] == 1:
        dist = w1_line_many(grid, support[:, 0], mu_w, mu_x[:, 0])
    else:
        dist = w1_two_sources_many(grid, support, mu_w, mu_x)
    feasible = dist <= theta + 1e-12
    return float(np.min((grid @ V_vals)[feasible]))


def w1_lp(a, xa, b, xb):
    """Transport LP through scipy's HiGHS (dense formulation)."""
    from scipy.optimize import linprog

    C = np.linalg.norm(xa[:, None, :] - xb[None, :, :], axis=2)
    m, n = C.shape
    A = np.zeros((m + n, m * n))
    for i in range(m):
        A[i, i * n:(i + 1) * n] = 1
    for j in range(n):
        A[m + j, j::n] = 1
    res = linprog(C.ravel(), A_eq=A, b_eq=np.concatenate([a, b * a.sum() / b.sum()]), bounds=(0, None), method="highs")
    return res.fun


def c_transform_scan(V_vals, support, lam, x):
    """``min_y V(y) + lam |x - y|`` by a plain Python loop."""
    best = np.inf
    for v, y in zip(V_vals, support):
        best = min(best, v + lam * float(np.sqrt(np.sum((np.asarray(x) - y) ** 2))))
    return best
