"""Wasserstein-ball robust minimisation on dyadic filtrations."""

__version__ = "0.1.0"

from ._accel import BACKEND
from .convergence import (
    ConvergenceRow,
    ConvergenceStudy,
    PerturbationRow,
    domain_perturbation_scan,
    run_convergence_study,
)
from .dro import (
    RobustInstance,
    Solution,
    lambda_c_transform,
    lipschitz_bounds,
    solve_dual,
    solve_primal,
    solve_robust_max,
    with_center_atoms,
)
from .errors import *  # noqa: F401,F403
from .filtration import Box, DyadicFiltration, mesh, project, refine
from .measures import DiscreteMeasure, PayoffSpec, dirac, first_moment, integrate, make_measure, uniform
from .payoffs import make_payoff
from .transport import DualPotential, TransportPlan, kr_dual_potential, w1_1d, w1_distance
