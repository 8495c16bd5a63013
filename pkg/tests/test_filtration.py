import math

import numpy as np
import pytest

from wdro import AtomOutsideBox, Box, DyadicFiltration, LevelOverflow, dirac, make_measure, mesh, project, refine, uniform, w1_distance
from wdro.filtration import projection_bound


def unit(level=0, d=1):
    return DyadicFiltration(Box(np.zeros(d), np.ones(d)), level)


def test_project_single_atom_level1():
    p = project(dirac(0.3), unit(1))
    assert p.atoms.tolist() == [[0.25]]
    assert w1_distance(p, dirac(0.3))[0] == pytest.approx(0.05, abs=1e-15)


def test_project_single_atom_level2():
    # 0.3 lies in [0.25, 0.5) whose centre is 0.375
    p = project(dirac(0.3), unit(2))
    assert p.atoms.tolist() == [[0.375]]
    err = w1_distance(p, dirac(0.3))[0]
    assert err == pytest.approx(0.075, abs=1e-15)
    assert err <= 0.125


def test_project_two_cells():
    p = project(uniform([0.1, 0.9]), unit(1))
    assert p.atoms.tolist() == [[0.25], [0.75]]
    assert p.weights.tolist() == [0.5, 0.5]


def test_boundary_convention():
    F = unit(1)
    assert F.cell_index([[0.0], [0.5], [1.0]]).ravel().tolist() == [0, 1, 1]


def test_atom_outside_box():
    with pytest.raises(AtomOutsideBox) as info:
        project(dirac(1.5), unit(2))
    assert "1.5" in str(info.value)


def test_refine():
    F1 = refine(unit(0))
    assert F1.level == 1
    lo, hi = F1.cell_bounds(np.array([[0], [1]]))
    assert lo.ravel().tolist() == [0.0, 0.5] and hi.ravel().tolist() == [0.5, 1.0]
    assert refine(unit(1, d=2)).n_cells == 16
    assert refine(refine(unit(3))).level == 5
    with pytest.raises(LevelOverflow):
        refine(DyadicFiltration(Box([0.0], [1.0]), 24))


def test_mesh():
    assert mesh(unit(3)) == 0.125
    assert mesh(DyadicFiltration(Box([0.0, 0.0], [2.0, 1.0]), 1)) == 1.0
    for d in (1, 2, 3):
        assert mesh(unit(4, d)) == 2.0**-4


def test_cells_tile_and_nest():
    F = DyadicFiltration(Box([-1.0, 0.0], [1.0, 3.0]), 3)
    centers = F.centers()
    assert centers.shape == (64, 2)
    # every centre is in its own cell, and children map to their parent
    idx = F.cell_index(centers)
    assert len({tuple(r) for r in idx}) == 64
    child = refine(F)
    cidx = child.cell_index(child.centers())
    parent_of = F.cell_index(child.centers())
    assert np.array_equal(parent_of, cidx // 2)
    lo, hi = F.cell_bounds(idx)
    assert np.allclose((hi - lo).prod(axis=1).sum(), 2.0 * 3.0)


def test_projection_properties(rng):
    for _ in range(20):
        d = int(rng.integers(1, 3))
        box = Box(-2.0 * np.ones(d), np.array([2.0, 1.0][:d]))
        n = int(rng.integers(1, 30))
        mu = make_measure(box.lower + rng.random((n, d)) * box.sides, rng.dirichlet(np.ones(n)))
        for level in range(0, 6):
            F = DyadicFiltration(box, level)
            p = project(mu, F)
            assert abs(p.weights.sum() - 1.0) <= 1e-12
            assert w1_distance(p, mu)[0] <= math.sqrt(d) / 2 * mesh(F) + 1e-9
            assert projection_bound(F) == math.sqrt(d) / 2 * mesh(F)
            assert project(p, F).equals(p)
            tower = project(project(mu, refine(F)), F)
            assert np.array_equal(tower.atoms, p.atoms)
            assert np.max(np.abs(tower.weights - p.weights)) <= 1e-15
