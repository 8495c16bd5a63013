"""Filtration-level convergence studies and radius scans."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dro import RobustInstance, solve_primal
from .errors import InputError
from .filtration import Box, DyadicFiltration, mesh, project
from .measures import DiscreteMeasure, PayoffSpec
from .transport import w1_distance

SOLVER_TOL = 1e-6


@dataclass(frozen=True)
class ConvergenceRow:
    level: int
    mesh: float
    center_error: float
    value: float
    gap_to_reference: float
    solver_gap: float

    def error_budget(self, K: float) -> float:
        """``K * (center_error + mesh / 2)``."""
        return K * (self.center_error + self.mesh / 2.0)


@dataclass(frozen=True)
class PerturbationRow:
    theta: float
    value: float


@dataclass
class ConvergenceStudy:
    """Rows of a study plus the reference solve they are measured against."""

    rows: list[ConvergenceRow]
    reference_level: int
    reference_value: float
    config: dict = field(default_factory=dict)

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def __getitem__(self, k):
        return self.rows[k]

    @property
    def monotone_decreasing(self) -> bool:
        """Whether ``level -> value`` was non-increasing in this study.

        Informational only: the centres move between levels so the feasible
        sets are not nested and monotonicity is not guaranteed.
        """
        vals = [r.value for r in self.rows]
        return all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


def solve_level(payoff: PayoffSpec, mu: DiscreteMeasure, box: Box, theta: float, level: int):
    """Solve the problem with centre and decision measure both on level ``level``.

    Returns ``(filtration, projected centre, solution)``.
    """
    F = DyadicFiltration(box, level)
    mu_n = project(mu, F)
    sol = solve_primal(RobustInstance(payoff, mu_n, theta, F.centers()))
    return F, mu_n, sol


def _map(fn, items, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def run_convergence_study(
    payoff: PayoffSpec,
    mu: DiscreteMeasure,
    box: Box,
    theta: float,
    levels,
    reference_level: int,
    threads: int = 1,
) -> ConvergenceStudy:
    """Solve the level-n problems for each level and compare with a fine reference.

    The value at ``reference_level`` stands in for the continuum optimum.
    """
    levels = sorted(int(n) for n in levels)
    if not levels:
        raise InputError("no levels given")
    if reference_level <= levels[-1]:
        raise InputError(f"reference_level {reference_level} must exceed max level {levels[-1]}")
    if not theta > 0:
        raise InputError("theta must be positive")

    def one(level):
        F, mu_n, sol = solve_level(payoff, mu, box, theta, level)
        err, _ = w1_distance(mu_n, mu)
        return level, mesh(F), err, sol

    results = _map(one, levels + [reference_level], threads)
    ref_value = results[-1][3].value
    rows = [
        ConvergenceRow(
            level=level,
            mesh=float(h),
            center_error=float(err),
            value=float(sol.value),
            gap_to_reference=float(abs(sol.value - ref_value)),
            solver_gap=float(sol.gap),
        )
        for level, h, err, sol in results[:-1]
    ]
    config = {
        "payoff": payoff.name,
        "payoff_params": [list(p) if isinstance(p, tuple) else p for p in payoff.params],
        "lipschitz_K": payoff.lipschitz_K,
        "theta": theta,
        "box": [[float(a), float(b)] for a, b in zip(box.lower, box.upper)],
        "levels": levels,
        "reference_level": reference_level,
        "center": {"atoms": mu.atoms.tolist(), "weights": mu.weights.tolist()},
    }
    return ConvergenceStudy(rows, reference_level, ref_value, config)


def theorem_budget(row: ConvergenceRow, K: float, solver_tol: float = SOLVER_TOL) -> float:
    """Allowed ``gap_to_reference`` for a row: ``K (center_error + mesh/2) + 10 tol``."""
    return row.error_budget(K) + 10.0 * solver_tol


def domain_perturbation_scan(
    payoff: PayoffSpec,
    center: DiscreteMeasure,
    support,
    thetas,
    threads: int = 1,
) -> list[PerturbationRow]:
    """Optimal value ``m(theta)`` for each radius, on a fixed support."""
    thetas = [float(t) for t in thetas]
    if any(not (t > 0 and math.isfinite(t)) for t in thetas):
        raise InputError("thetas must be positive and finite")
    if any(b < a for a, b in zip(thetas, thetas[1:])):
        raise InputError("thetas must be sorted ascending")
    support = np.asarray(support, dtype=np.float64)

    def one(t):
        return PerturbationRow(t, solve_primal(RobustInstance(payoff, center, t, support), with_dual=False).value)

    return _map(one, thetas, threads)


def rows_to_csv(rows) -> str:
    """CSV text for convergence or perturbation rows, floats via ``repr``."""
    rows = list(rows)
    if rows and isinstance(rows[0], PerturbationRow):
        lines = ["theta,value"] + [f"{r.theta!r},{r.value!r}" for r in rows]
    else:
        lines = ["level,mesh,center_error,value,gap_to_reference,solver_gap"]
        lines += [
            f"{r.level},{r.mesh!r},{r.center_error!r},{r.value!r},{r.gap_to_reference!r},{r.solver_gap!r}"
            for r in rows
        ]
    return "\n".join(lines) + "\n"
