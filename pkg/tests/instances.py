"""Seeded random instances shared by unit and acceptance tests."""
import numpy as np

from wdro import RobustInstance, make_measure, with_center_atoms
from wdro.payoffs import bump, call, clamp, constant, tabulated


def random_payoff(rng, d, kind=None):
    kind = int(rng.integers(4)) if kind is None else kind
    if kind == 0:
        return clamp(a=rng.normal(size=d), b=rng.normal(), lo=-1.0, hi=1.0)
    if kind == 1:
        return call(strike=rng.normal(), cap=rng.uniform(0.5, 2.0), a=rng.normal(size=d))
    if kind == 2:
        sign = rng.choice([-1.0, 1.0])
        return bump(height=sign * rng.uniform(0.5, 2.0), width=rng.uniform(0.3, 2.0), center=rng.normal(size=d))
    if d == 1:
        grid = np.sort(rng.uniform(-3.0, 3.0, 8))
        return tabulated(grid, rng.normal(size=8))
    return constant(rng.normal(), dim=d)


def random_measure(rng, n, d, spread=1.0):
    return make_measure(spread * rng.normal(size=(n, d)), rng.dirichlet(np.ones(n)))


def random_instance(rng, max_center=64, max_support=256, theta_range=(-3.0, 1.0)):
    d = int(rng.integers(1, 3))
    n = int(rng.integers(1, max_center + 1))
    m = int(rng.integers(n, max_support + 1))
    mu = random_measure(rng, n, d)
    support = with_center_atoms(rng.uniform(-3.0, 3.0, size=(m - len(mu), d)), mu)
    theta = float(10 ** rng.uniform(*theta_range))
    return RobustInstance(random_payoff(rng, d), mu, theta, support)


def tiny_instance(rng, k):
    """Support <= 4, centre <= 3 atoms (<= 2 atoms in 2-d)."""
    d = 1 if k % 5 < 3 else 2
    nc = int(rng.integers(1, 4 if d == 1 else 3))
    ns = int(rng.integers(max(nc, 2), 5))
    mu = make_measure(rng.uniform(-2.0, 2.0, (nc, d)), rng.dirichlet(np.ones(nc)))
    support = with_center_atoms(rng.uniform(-2.0, 2.0, (ns - len(mu), d)), mu)
    V = random_payoff(rng, d, kind=k % 3)
    diam = float(np.max(np.linalg.norm(support[:, None] - support[None], axis=2)))
    theta = float(rng.uniform(0.01, 1.0) * diam)
    return RobustInstance(V, mu, theta, support), diam
