"""
Sparse Linear Algebra Package

CSR matrices from triplets, the SuperLU direct solver, bordering for
Lagrange-multiplier constraints and an optional GMRES path.
"""

from .sparse_solver import (
    SparseMatrix,
    LinearSolution,
    SingularMatrixError,
    TripletIndexError,
    from_triplets,
    from_coo_arrays,
    matvec,
    bordered,
    solve,
    solve_direct,
    solve_iterative,
)

__all__ = [
    'SparseMatrix',
    'LinearSolution',
    'SingularMatrixError',
    'TripletIndexError',
    'from_triplets',
    'from_coo_arrays',
    'matvec',
    'bordered',
    'solve',
    'solve_direct',
    'solve_iterative'
]
