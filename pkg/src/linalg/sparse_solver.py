"""
Sparse Matrices and Linear Solvers

Compressed-sparse-row matrices built from triplets, the direct sparse LU solve
behind every "Solve" step of the schemes, a bordering helper for the zero-mean
pressure multiplier, and an optional restarted-GMRES path.

Key Features:
- Triplet assembly with duplicate summation and sorted column indices
- SuperLU factorization with COLAMD fill-reducing ordering and partial pivoting
- Structural and numerical singularity reports naming the failing row/pivot
- Residuals always recomputed from the returned solution
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

logger = logging.getLogger(__name__)

SparseMatrix = sp.csr_matrix


class TripletIndexError(IndexError):
    """Raised when a triplet addresses a row or column outside the matrix."""


class SingularMatrixError(RuntimeError):
    """
    Raised when a system cannot be factorized.

    Attributes:
        index (Optional[int]): Row (structural) or pivot column (numerical)
        kind (str): "structural" or "numerical"
    """

    def __init__(self, message: str, index: Optional[int] = None, kind: str = "numerical"):
        super().__init__(message)
        self.index = index
        self.kind = kind


@dataclass
class LinearSolution:
    """
    Result of a linear solve.

    Attributes:
        x (np.ndarray): Solution vector
        residual (float): ||A x - b||_2 recomputed after the solve
        method (str): "direct" or "gmres"
        pivot_growth (Optional[float]): max|U| / max|A| for the direct path
        iterations (Optional[int]): Krylov iterations for the iterative path
    """
    x: np.ndarray
    residual: float
    method: str
    pivot_growth: Optional[float] = None
    iterations: Optional[int] = None


def from_coo_arrays(n_rows: int, n_cols: int, rows: np.ndarray, cols: np.ndarray,
                    values: np.ndarray) -> SparseMatrix:
    """
    Build a CSR matrix from parallel row/column/value arrays.

    Duplicates are summed; column indices end up sorted and unique per row.

    Raises:
        TripletIndexError: If any index is out of range
    """
    rows = np.asarray(rows, dtype=np.int64).ravel()
    cols = np.asarray(cols, dtype=np.int64).ravel()
    values = np.asarray(values, dtype=float).ravel()
    if rows.size:
        if rows.min() < 0 or rows.max() >= n_rows:
            bad = rows[(rows < 0) | (rows >= n_rows)][0]
            raise TripletIndexError(f"Row index {bad} outside [0, {n_rows})")
        if cols.min() < 0 or cols.max() >= n_cols:
            bad = cols[(cols < 0) | (cols >= n_cols)][0]
            raise TripletIndexError(f"Column index {bad} outside [0, {n_cols})")
    matrix = sp.coo_matrix((values, (rows, cols)), shape=(n_rows, n_cols)).tocsr()
    matrix.sum_duplicates()
    matrix.sort_indices()
    return matrix


def from_triplets(n_rows: int, n_cols: int,
                  triplets: Iterable[Tuple[int, int, float]]) -> SparseMatrix:
    """
    Build a CSR matrix from (row, col, value) triplets.

    Args:
        n_rows (int): Number of rows
        n_cols (int): Number of columns
        triplets: Iterable of (row, col, value); duplicates are summed

    Returns:
        SparseMatrix: The matrix
    """
    triplets = list(triplets)
    if not triplets:
        return from_coo_arrays(n_rows, n_cols, np.empty(0), np.empty(0), np.empty(0))
    rows, cols, values = zip(*triplets)
    return from_coo_arrays(n_rows, n_cols, rows, cols, values)


def matvec(matrix: SparseMatrix, x: np.ndarray) -> np.ndarray:
    """Matrix-vector product A x."""
    return matrix @ np.asarray(x, dtype=float)


def bordered(matrix: SparseMatrix, column: np.ndarray, row: Optional[np.ndarray] = None,
             corner: float = 0.0) -> SparseMatrix:
    """
    Append one dense column and one dense row to a square matrix.

    Builds [[A, c], [r^T, corner]], used for Lagrange multipliers such as the
    zero-mean pressure constraint.

    Args:
        matrix (SparseMatrix): n x n matrix A
        column (np.ndarray): Length-n column c
        row (np.ndarray): Length-n row r; defaults to c
        corner (float): Bottom-right entry

    Returns:
        SparseMatrix: (n+1) x (n+1) matrix
    """
    column = np.asarray(column, dtype=float).reshape(-1, 1)
    row = column.T if row is None else np.asarray(row, dtype=float).reshape(1, -1)
    block = sp.bmat([[matrix, sp.csr_matrix(column)],
                     [sp.csr_matrix(row), sp.csr_matrix([[corner]])]], format='csr')
    block.sort_indices()
    return block


def _check_square(matrix: SparseMatrix, rhs: np.ndarray) -> None:
    n_rows, n_cols = matrix.shape
    if n_rows != n_cols:
        raise ValueError(f"Matrix must be square, got {n_rows} x {n_cols}")
    if rhs.shape != (n_rows,):
        raise ValueError(f"Right-hand side has length {rhs.size}, expected {n_rows}")


def _structural_check(matrix: SparseMatrix) -> None:
    pruned = matrix.copy()
    pruned.eliminate_zeros()
    empty_rows = np.flatnonzero(np.diff(pruned.indptr) == 0)
    if empty_rows.size:
        row = int(empty_rows[0])
        raise SingularMatrixError(f"Structurally singular matrix: row {row} is empty",
                                  index=row, kind="structural")
    empty_cols = np.flatnonzero(pruned.getnnz(axis=0) == 0)
    if empty_cols.size:
        col = int(empty_cols[0])
        raise SingularMatrixError(f"Structurally singular matrix: column {col} is empty",
                                  index=col, kind="structural")


def solve_direct(matrix: SparseMatrix, rhs: Sequence[float]) -> LinearSolution:
    """
    Solve A x = b with sparse LU (SuperLU, COLAMD ordering, partial pivoting).

    Args:
        matrix (SparseMatrix): Square system matrix
        rhs: Right-hand side

    Returns:
        LinearSolution: Solution with recomputed residual and pivot growth

    Raises:
        SingularMatrixError: On structural or numerical singularity
    """
    matrix = sp.csr_matrix(matrix)
    rhs = np.asarray(rhs, dtype=float)
    _check_square(matrix, rhs)
    _structural_check(matrix)

    try:
        lu = spla.splu(matrix.tocsc(), permc_spec="COLAMD", diag_pivot_thresh=1.0)
    except RuntimeError as e:
        raise SingularMatrixError(f"Numerically singular matrix: {e}", kind="numerical") from e

    u_diag = np.abs(lu.U.diagonal())
    a_max = float(np.abs(matrix.data).max()) if matrix.nnz else 0.0
    tiny = u_diag <= np.finfo(float).eps * max(a_max, 1.0) * matrix.shape[0]
    if tiny.any():
        pivot = int(lu.perm_c[np.flatnonzero(tiny)[0]])
        raise SingularMatrixError(f"Numerically singular matrix: zero pivot in column {pivot}",
                                  index=pivot, kind="numerical")

    x = lu.solve(rhs)
    residual = float(np.linalg.norm(matrix @ x - rhs))
    growth = float(np.abs(lu.U.data).max() / a_max) if a_max > 0 else 1.0
    logger.debug(f"splu n={matrix.shape[0]} nnz(L+U)={lu.L.nnz + lu.U.nnz} "
                 f"residual={residual:.3e}")
    return LinearSolution(x=x, residual=residual, method="direct", pivot_growth=growth)


def solve_iterative(matrix: SparseMatrix, rhs: Sequence[float], restart: int = 50,
                    tol: float = 1e-10, maxiter: int = 2000) -> LinearSolution:
    """
    Restarted GMRES with an incomplete-LU preconditioner.

    Not used by the acceptance studies; available through the schemes'
    ``solver="gmres"`` parameter.

    Raises:
        RuntimeError: If GMRES does not reach the tolerance
    """
    matrix = sp.csc_matrix(matrix)
    rhs = np.asarray(rhs, dtype=float)
    _check_square(matrix, rhs)

    ilu = spla.spilu(matrix, drop_tol=1e-5, fill_factor=20)
    preconditioner = spla.LinearOperator(matrix.shape, ilu.solve)
    iterations = []
    x, info = spla.gmres(matrix, rhs, M=preconditioner, restart=restart, rtol=tol,
                         atol=0.0, maxiter=maxiter,
                         callback=lambda res: iterations.append(res),
                         callback_type='pr_norm')
    residual = float(np.linalg.norm(matrix @ x - rhs))
    if info != 0:
        raise RuntimeError(f"GMRES did not converge (info={info}, residual={residual:.3e})")
    return LinearSolution(x=x, residual=residual, method="gmres", iterations=len(iterations))


def solve(matrix: SparseMatrix, rhs: Sequence[float], method: str = "direct") -> LinearSolution:
    """Dispatch to the direct or iterative solver by name."""
    if method == "direct":
        return solve_direct(matrix, rhs)
    if method == "gmres":
        return solve_iterative(matrix, rhs)
    raise ValueError(f"Unknown solver '{method}'; use 'direct' or 'gmres'")
