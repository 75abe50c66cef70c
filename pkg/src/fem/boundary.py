"""
Dirichlet Conditions by Row Replacement

Each constrained row of the system is replaced by an identity row and the
right-hand side entry by the prescribed value. Columns are left untouched,
so the modified system is generally nonsymmetric.
"""

from typing import Callable, Tuple

import numpy as np
import scipy.sparse as sp

from fem.dofmap import DofMap, interpolate
from linalg.sparse_solver import SparseMatrix


class DirichletConflictError(ValueError):
    """Raised when one dof is constrained twice with different values."""


def apply_dirichlet(matrix: SparseMatrix, rhs: np.ndarray, dofs, values,
                    offset: int = 0) -> Tuple[SparseMatrix, np.ndarray]:
    """
    Replace constrained rows by identity rows.

    Args:
        matrix (SparseMatrix): System matrix
        rhs (np.ndarray): Right-hand side
        dofs: Constrained row indices (relative to ``offset``)
        values: One value per constrained dof (or a scalar)
        offset (int): Shift added to ``dofs``, for blocks of a larger system

    Returns:
        Tuple[SparseMatrix, np.ndarray]: Modified matrix and right-hand side

    Raises:
        DirichletConflictError: If a dof appears twice with different values
        IndexError: If a dof is outside the system
    """
    dofs = np.asarray(dofs, dtype=np.int64).ravel() + offset
    values = np.broadcast_to(np.asarray(values, dtype=float), dofs.shape)
    n_rows = matrix.shape[0]
    if dofs.size and (dofs.min() < 0 or dofs.max() >= n_rows):
        raise IndexError(f"Dirichlet dof outside [0, {n_rows})")

    order = np.argsort(dofs, kind='stable')
    sorted_dofs, sorted_values = dofs[order], values[order]
    repeated = np.flatnonzero(np.diff(sorted_dofs) == 0)
    conflicts = repeated[sorted_values[repeated] != sorted_values[repeated + 1]]
    if conflicts.size:
        k = conflicts[0]
        raise DirichletConflictError(
            f"Dof {sorted_dofs[k]} constrained to both {sorted_values[k]} and {sorted_values[k + 1]}"
        )

    mask = np.zeros(n_rows)
    mask[dofs] = 1.0
    modified = sp.diags(1.0 - mask) @ sp.csr_matrix(matrix) + sp.diags(mask)
    modified = modified.tocsr()
    modified.eliminate_zeros()
    modified.sort_indices()

    new_rhs = np.array(rhs, dtype=float, copy=True)
    new_rhs[sorted_dofs] = sorted_values
    return modified, new_rhs


def boundary_values(dofmap: DofMap, func: Callable) -> Tuple[np.ndarray, np.ndarray]:
    """
    Boundary dofs of a space and the values of a function at their nodes.

    Args:
        dofmap (DofMap): Constrained space
        func (Callable): f(x, y) (scalar) or returning (f1, f2) (vector)

    Returns:
        Tuple of (dofs, values)
    """
    dofs = dofmap.boundary_dofs
    return dofs, interpolate(dofmap, func).coefficients[dofs]
