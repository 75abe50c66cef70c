"""
Manufactured-Solution Package

This package verifies the schemes against closed-form solutions:
- exact_solutions: exact fields of both models with analytic derivatives
- forcing: residual sources checked by a finite-difference oracle
- convergence: refinement studies, observed orders and reports
"""

from .exact_solutions import ExactField, ExactSolution, exact_solution, exact_temp, exact_vd
from .forcing import (
    DEFAULT_SEED,
    ForcingOracleError,
    ForcingSource,
    UnverifiedForcingError,
    forcing,
    manufactured_sources,
    oracle_deviation,
    require_verified,
)
from .convergence import (
    ConvergenceReport,
    ConvergenceRow,
    ModelKind,
    MODEL_FIELDS,
    default_parameters,
    manufactured_problem,
    observed_order,
    run_convergence,
    run_level,
    run_poisson_study,
    run_time_refinement,
    validate_levels,
)

__all__ = [
    'ExactField',
    'ExactSolution',
    'exact_solution',
    'exact_temp',
    'exact_vd',
    'DEFAULT_SEED',
    'ForcingOracleError',
    'ForcingSource',
    'UnverifiedForcingError',
    'forcing',
    'manufactured_sources',
    'oracle_deviation',
    'require_verified',
    'ConvergenceReport',
    'ConvergenceRow',
    'ModelKind',
    'MODEL_FIELDS',
    'default_parameters',
    'manufactured_problem',
    'observed_order',
    'run_convergence',
    'run_level',
    'run_poisson_study',
    'run_time_refinement',
    'validate_levels',
]
