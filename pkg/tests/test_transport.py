import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wdro import DimensionMismatch, dirac, kr_dual_potential, make_measure, uniform, w1_1d, w1_distance
from wdro.measures import integrate
from wdro.transport import solve_transport

from instances import random_measure, random_payoff
from oracles import w1_lp


def plan_ok(rho, sigma, plan):
    C = np.linalg.norm(plan.source_atoms[:, None] - plan.target_atoms[None], axis=2)
    assert np.all(plan.flow >= 0)
    assert np.allclose(plan.flow.sum(axis=1), rho.weights, atol=1e-9, rtol=0)
    assert np.allclose(plan.flow.sum(axis=0), sigma.weights, atol=1e-9, rtol=0)
    assert abs(np.sum(plan.flow * C) - plan.total_cost) <= 1e-9


def test_point_masses():
    a, b = np.array([0.0, 1.0, 2.0]), np.array([3.0, -1.0, 0.5])
    value, plan = w1_distance(dirac(a), dirac(b))
    assert value == pytest.approx(np.linalg.norm(a - b), abs=1e-15)
    assert plan.flow.tolist() == [[1.0]]


def test_forced_plan():
    value, plan = w1_distance(uniform([0.0, 1.0, 2.0, 3.0]), dirac(0.0))
    assert value == pytest.approx(1.5, abs=1e-15)
    plan_ok(uniform([0.0, 1.0, 2.0, 3.0]), dirac(0.0), plan)


def test_w1_1d_examples():
    assert w1_1d(dirac(0.0), dirac(5.0)) == 5.0
    assert w1_1d(uniform([0.0, 1.0]), uniform([0.0, 1.0])) == 0.0
    assert w1_1d(uniform([0.0, 1.0]), dirac(0.5)) == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(DimensionMismatch):
        w1_1d(dirac([0.0, 0.0]), dirac([1.0, 0.0]))


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        w1_distance(dirac(0.0), dirac([0.0, 1.0]))


def test_random_1d_matches_closed_form(rng):
    for _ in range(50):
        rho = random_measure(rng, int(rng.integers(1, 17)), 1)
        sigma = random_measure(rng, int(rng.integers(1, 17)), 1)
        value, plan = w1_distance(rho, sigma)
        assert abs(value - w1_1d(rho, sigma)) <= 1e-9
        plan_ok(rho, sigma, plan)


def test_matches_highs_in_2d(rng):
    for _ in range(20):
        rho = random_measure(rng, int(rng.integers(1, 20)), 2)
        sigma = random_measure(rng, int(rng.integers(1, 20)), 2)
        value, plan = w1_distance(rho, sigma)
        assert value == pytest.approx(w1_lp(rho.weights, rho.atoms, sigma.weights, sigma.atoms), abs=1e-8)
        plan_ok(rho, sigma, plan)


def test_degenerate_shared_atoms():
    # many zero-distance pairs and equal costs: heavy degeneracy
    pts = np.array([[0.0], [1.0], [2.0], [3.0]])
    rho = make_measure(pts, [0.25] * 4)
    sigma = make_measure(pts[::-1] + 0.0, [0.25] * 4)
    assert w1_distance(rho, sigma)[0] == 0.0
    grid = np.array([[i, j] for i in range(5) for j in range(5)], dtype=float)
    a = uniform(grid)
    b = uniform(grid + [1.0, 0.0])
    assert w1_distance(a, b)[0] == pytest.approx(1.0, abs=1e-12)


def test_solve_transport_duals_feasible(rng):
    C = rng.uniform(size=(30, 40))
    a = rng.dirichlet(np.ones(30))
    b = rng.dirichlet(np.ones(40))
    flow, u, v = solve_transport(a, b, C)
    assert np.min(C - u[:, None] - v[None, :]) >= -1e-10
    assert abs(np.sum(flow * C) - (a @ u + b @ v)) <= 1e-10


def test_dual_potential_examples():
    f = kr_dual_potential(dirac(0.0), dirac(1.0))
    vals = dict(zip(f.atoms[:, 0], f.values))
    assert vals[0.0] - vals[1.0] == pytest.approx(1.0, abs=1e-12)
    mu = uniform([0.0, 2.0])
    g = kr_dual_potential(mu, mu)
    assert abs(g.integrate(mu) - g.integrate(mu)) == 0.0


def test_dual_potential_random(rng):
    for _ in range(30):
        d = int(rng.integers(1, 3))
        rho = random_measure(rng, int(rng.integers(1, 17)), d)
        sigma = random_measure(rng, int(rng.integers(1, 17)), d)
        f = kr_dual_potential(rho, sigma)
        value, _ = w1_distance(rho, sigma)
        assert abs(f.integrate(rho) - f.integrate(sigma) - value) <= 1e-7
        D = np.linalg.norm(f.atoms[:, None] - f.atoms[None], axis=2)
        assert np.all(np.abs(f.values[:, None] - f.values[None]) <= D + 1e-9)


triples = st.tuples(st.integers(0, 2**32 - 1), st.integers(1, 2))


@settings(max_examples=40, deadline=None)
@given(triples)
def test_metric_axioms(args):
    seed, d = args
    rng = np.random.default_rng(seed)
    rho, sigma, tau = (random_measure(rng, int(rng.integers(1, 12)), d) for _ in range(3))
    w = lambda p, q: w1_distance(p, q)[0]
    assert abs(w(rho, sigma) - w(sigma, rho)) <= 1e-9
    assert w(rho, rho) <= 1e-12
    assert w(rho, tau) <= w(rho, sigma) + w(sigma, tau) + 1e-9


@settings(max_examples=40, deadline=None)
@given(triples)
def test_kantorovich_rubinstein_for_payoffs(args):
    seed, d = args
    rng = np.random.default_rng(seed)
    rho, sigma = (random_measure(rng, int(rng.integers(1, 12)), d) for _ in range(2))
    V = random_payoff(rng, d)
    assert abs(integrate(V, rho) - integrate(V, sigma)) <= V.lipschitz_K * w1_distance(rho, sigma)[0] + 1e-9


def test_plan_csv():
    _, plan = w1_distance(uniform([0.0, 1.0]), dirac(0.5))
    lines = plan.to_csv().splitlines()
    assert lines[0] == "i,j,flow,cost"
    assert lines[1:] == ["0,0,0.5,0.5", "1,0,0.5,0.5"]
