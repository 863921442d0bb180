"""Full-discrete approximation of time-periodic heat-equation solutions.

P1 finite elements in space, the fundamental matrix of the semidiscrete ODE
system in time, and constructive a priori error bounds for the result.
"""
from .bounds import (
    BoundInputs,
    BoundReport,
    bound_report,
    continuous_bounds,
    full_discrete_bounds,
    k_constants,
    kappa1,
    kappa1_literal,
    nonhom_bounds,
)
from .dense_linalg import GenEigDecomp, cholesky, generalized_eig, matexp, two_norm
from .fem_space import FemPair, Mesh1D, SpaceConstants, assemble, load_vector, space_constants
from .manufactured import ErrorReport, ManufacturedProblem, aposteriori_errors, eval_exact, f_norm_analytic, slope
from .periodic_solver import (
    FullDiscreteSolution,
    SemidiscreteSystem,
    TimeGrid,
    load_integral,
    ode_residual,
    solve_periodic,
    theta_apply,
)
from .quadrature import TimeQuadrature
from .study import StudyConfig, StudyRow, emit_csv, read_csv, run_study

__version__ = "0.1.0"
