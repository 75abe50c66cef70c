"""
Finite-Element Assembly for the EHD Schemes

This module assembles every bilinear and trilinear form used by the two time
steppers. All element kernels are vectorized over triangles with numpy: each
form is evaluated as an einsum over (triangle, quadrature point, test, trial)
and scattered through the triplet constructor, which sums duplicates in a
fixed order so matrices are bit-reproducible.

Forms:
- mass:            int w phi_j phi_i
- stiffness:       int c w grad(phi_j) . grad(phi_i)
- convection:      int w (wind . grad phi_j) phi_i
- divergence:      int psi_i div(v_j)              (pressure gradient block is -B^T)
- transport:       int div(wind phi_j) phi_i  [- 1/2 int phi_j div(wind) phi_i]
- load vectors:    int f phi_i,  int F . grad phi_i,  int w grad(g) . v_i
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Union

import numpy as np

from mesh.triangulation import Mesh
from fem.quadrature import QuadratureRule, quadrature
from fem.elements import lagrange_element
from fem.dofmap import DofMap, DiscreteField, SpaceKind, SpaceMismatchError, require_same_mesh
from linalg.sparse_solver import SparseMatrix, from_coo_arrays

logger = logging.getLogger(__name__)

DEFAULT_QUADRATURE_DEGREE = 5


@dataclass(frozen=True, eq=False)
class ElementTables:
    """
    Geometry and basis tables of one mesh under one quadrature rule.

    Attributes:
        rule (QuadratureRule): Quadrature rule
        det (np.ndarray): |det J| per triangle
        weights (np.ndarray): T x nq physical quadrature weights
        points (np.ndarray): T x nq x 2 physical quadrature points
        values (dict): degree -> nq x n_local shape values
        gradients (dict): degree -> T x nq x n_local x 2 physical gradients
    """
    rule: QuadratureRule
    det: np.ndarray
    weights: np.ndarray
    points: np.ndarray
    values: dict
    gradients: dict


@lru_cache(maxsize=32)
def element_tables(mesh: Mesh, degree: int = DEFAULT_QUADRATURE_DEGREE) -> ElementTables:
    """Compute (and cache per mesh) the element tables for a quadrature degree."""
    rule = quadrature(degree)
    jac, shift, det = mesh.jacobians()
    inv_jac_t = np.linalg.inv(jac).transpose(0, 2, 1)
    points = shift[:, None, :] + np.einsum('tab,qb->tqa', jac, rule.points)
    values, gradients = {}, {}
    for element_degree in (1, 2):
        element = lagrange_element(element_degree)
        values[element_degree] = element.values(rule.points)
        gradients[element_degree] = np.einsum('tab,qlb->tqla', inv_jac_t,
                                              element.gradients(rule.points))
    return ElementTables(
        rule=rule,
        det=det,
        weights=det[:, None] * rule.weights[None, :],
        points=points,
        values=values,
        gradients=gradients,
    )


def _tables(dofmap: DofMap) -> ElementTables:
    return element_tables(dofmap.mesh, DEFAULT_QUADRATURE_DEGREE)


# ---------------------------------------------------------------------------
# Field evaluation at quadrature points
# ---------------------------------------------------------------------------

def field_values(field: DiscreteField, tables: Optional[ElementTables] = None) -> np.ndarray:
    """
    Values of a field at the quadrature points.

    Returns:
        np.ndarray: T x nq for scalar fields, T x nq x 2 for vector fields
    """
    tables = tables or _tables(field.dofmap)
    basis = tables.values[field.dofmap.element.degree]
    local = field.nodal()[field.dofmap.cell_nodes]
    if field.dofmap.is_vector:
        return np.einsum('tlc,ql->tqc', local, basis)
    return np.einsum('tl,ql->tq', local, basis)


def field_gradients(field: DiscreteField, tables: Optional[ElementTables] = None) -> np.ndarray:
    """
    Gradients of a field at the quadrature points.

    Returns:
        np.ndarray: T x nq x 2 for scalar fields, T x nq x 2 x 2 (component,
        derivative) for vector fields
    """
    tables = tables or _tables(field.dofmap)
    grads = tables.gradients[field.dofmap.element.degree]
    local = field.nodal()[field.dofmap.cell_nodes]
    if field.dofmap.is_vector:
        return np.einsum('tlc,tqld->tqcd', local, grads)
    return np.einsum('tl,tqla->tqa', local, grads)


def field_divergence(field: DiscreteField, tables: Optional[ElementTables] = None) -> np.ndarray:
    """Divergence of a vector field at the quadrature points (T x nq)."""
    _require_vector(field.dofmap, "divergence")
    grads = field_gradients(field, tables)
    return grads[:, :, 0, 0] + grads[:, :, 1, 1]


# ---------------------------------------------------------------------------
# Scatter helpers
# ---------------------------------------------------------------------------

def _scatter_matrix(test: DofMap, trial: DofMap, local: np.ndarray) -> SparseMatrix:
    rows = np.broadcast_to(test.cell_dofs[:, :, None], local.shape)
    cols = np.broadcast_to(trial.cell_dofs[:, None, :], local.shape)
    return from_coo_arrays(test.n_global_dofs, trial.n_global_dofs, rows, cols, local)


def _scatter_vector(dofmap: DofMap, local: np.ndarray) -> np.ndarray:
    return np.bincount(dofmap.cell_dofs.ravel(), weights=local.ravel(),
                       minlength=dofmap.n_global_dofs)


def _block_diagonal(local: np.ndarray, n_components: int) -> np.ndarray:
    """Repeat a scalar element matrix on the diagonal blocks of a vector space."""
    if n_components == 1:
        return local
    n_tri, n_loc, _ = local.shape
    blocked = np.zeros((n_tri, 2 * n_loc, 2 * n_loc))
    blocked[:, :n_loc, :n_loc] = local
    blocked[:, n_loc:, n_loc:] = local
    return blocked


def _require_vector(dofmap: DofMap, what: str) -> None:
    if dofmap.kind is not SpaceKind.VECTOR_P2:
        raise SpaceMismatchError(f"{what} needs a vector-P2 field, got {dofmap.kind.value}")


def _require_scalar(item, what: str) -> None:
    dofmap = item.dofmap if isinstance(item, DiscreteField) else item
    if dofmap.is_vector:
        raise SpaceMismatchError(f"{what} needs a scalar space, got {dofmap.kind.value}")


def _weight_values(weight: Optional[DiscreteField], tables: ElementTables) -> np.ndarray:
    if weight is None:
        return tables.weights
    _require_scalar(weight, "Coefficient field")
    return tables.weights * field_values(weight, tables)


# ---------------------------------------------------------------------------
# Matrices
# ---------------------------------------------------------------------------

def assemble_mass(dofmap: DofMap, coefficient: Optional[DiscreteField] = None,
                  scale: float = 1.0) -> SparseMatrix:
    """
    Mass matrix int w phi_j phi_i, block diagonal on the vector space.

    Args:
        dofmap (DofMap): Trial and test space
        coefficient (DiscreteField): Optional scalar weight on the same mesh
        scale (float): Constant factor

    Returns:
        SparseMatrix: Symmetric mass matrix

    Raises:
        SpaceMismatchError: If the coefficient lives on another mesh or is a vector
    """
    require_same_mesh(dofmap, coefficient)
    tables = _tables(dofmap)
    basis = tables.values[dofmap.element.degree]
    weight = scale * _weight_values(coefficient, tables)
    local = np.einsum('tq,qi,qj->tij', weight, basis, basis)
    return _scatter_matrix(dofmap, dofmap, _block_diagonal(local, dofmap.n_components))


def assemble_stiffness(dofmap: DofMap, coefficient: float = 1.0,
                       weight: Optional[DiscreteField] = None) -> SparseMatrix:
    """
    Stiffness matrix c int w grad(phi_j) . grad(phi_i).

    On the vector space the matrix is the componentwise (vector Laplacian)
    block diagonal. The optional weight field houses the migration block of
    the temperature model.
    """
    require_same_mesh(dofmap, weight)
    tables = _tables(dofmap)
    grads = tables.gradients[dofmap.element.degree]
    w = coefficient * _weight_values(weight, tables)
    local = np.einsum('tq,tqia,tqja->tij', w, grads, grads)
    return _scatter_matrix(dofmap, dofmap, _block_diagonal(local, dofmap.n_components))


def assemble_convection(dofmap: DofMap, wind: DiscreteField,
                        density_weight: Optional[DiscreteField] = None,
                        scale: float = 1.0) -> SparseMatrix:
    """
    Convection matrix A_ij = int w (wind . grad phi_j) phi_i.

    No symmetrization is applied. On the vector space the matrix acts on each
    velocity component separately, i.e. it discretizes (w wind . grad) u.

    Args:
        dofmap (DofMap): Space of the transported field
        wind (DiscreteField): Vector-P2 transporting field
        density_weight (DiscreteField): Optional scalar weight (e.g. a density)
        scale (float): Constant factor

    Returns:
        SparseMatrix: The convection matrix
    """
    _require_vector(wind.dofmap, "Convection wind")
    require_same_mesh(dofmap, wind, density_weight)
    tables = _tables(dofmap)
    basis = tables.values[dofmap.element.degree]
    grads = tables.gradients[dofmap.element.degree]
    weight = scale * _weight_values(density_weight, tables)
    wind_q = field_values(wind, tables)
    local = np.einsum('tq,qi,tqa,tqja->tij', weight, basis, wind_q, grads)
    return _scatter_matrix(dofmap, dofmap, _block_diagonal(local, dofmap.n_components))


def assemble_divergence(velocity_dofmap: DofMap, pressure_dofmap: DofMap) -> SparseMatrix:
    """
    Discrete divergence B_ij = int psi_i div(v_j).

    Rows follow the scalar-P1 pressure space, columns the vector-P2 velocity
    space; the pressure-gradient block of the momentum equation is -B^T.
    """
    _require_vector(velocity_dofmap, "Divergence")
    if pressure_dofmap.kind is not SpaceKind.SCALAR_P1:
        raise SpaceMismatchError(f"Pressure space must be scalar-P1, got {pressure_dofmap.kind.value}")
    require_same_mesh(velocity_dofmap, pressure_dofmap)
    tables = _tables(velocity_dofmap)
    psi = tables.values[1]
    grads = tables.gradients[2]
    blocks = [np.einsum('tq,qi,tqj->tij', tables.weights, psi, grads[..., c]) for c in range(2)]
    local = np.concatenate(blocks, axis=2)
    return _scatter_matrix(pressure_dofmap, velocity_dofmap, local)


def assemble_conservative_transport(dofmap: DofMap, wind: DiscreteField,
                                    correction: bool = False) -> SparseMatrix:
    """
    Conservative transport int div(wind phi_j) phi_i.

    Expanded by the product rule as int (wind . grad phi_j) phi_i +
    int (div wind) phi_j phi_i. With ``correction`` the term
    -1/2 int phi_j (div wind) phi_i is added, as in the density step.
    """
    _require_scalar(dofmap, "Conservative transport")
    _require_vector(wind.dofmap, "Transport wind")
    require_same_mesh(dofmap, wind)
    tables = _tables(dofmap)
    basis = tables.values[dofmap.element.degree]
    grads = tables.gradients[dofmap.element.degree]
    wind_q = field_values(wind, tables)
    div_q = field_divergence(wind, tables)
    factor = 0.5 if correction else 1.0
    local = (np.einsum('tq,qi,tqa,tqja->tij', tables.weights, basis, wind_q, grads)
             + np.einsum('tq,qi,qj->tij', factor * tables.weights * div_q, basis, basis))
    return _scatter_matrix(dofmap, dofmap, local)


# ---------------------------------------------------------------------------
# Right-hand sides
# ---------------------------------------------------------------------------

SourceLike = Union[Callable, float, np.ndarray]


def quadrature_values(dofmap: DofMap, source: SourceLike) -> np.ndarray:
    """
    Evaluate a source at the physical quadrature points.

    Callables take (x, y) arrays; the vector space expects (f1, f2) back.

    Returns:
        np.ndarray: T x nq (scalar) or T x nq x 2 (vector)
    """
    tables = _tables(dofmap)
    x, y = tables.points[..., 0], tables.points[..., 1]
    if not callable(source):
        value = source
        source = lambda xx, yy: value
    values = source(x, y)
    if dofmap.is_vector:
        return np.stack([np.broadcast_to(values[0], x.shape),
                         np.broadcast_to(values[1], x.shape)], axis=-1)
    return np.broadcast_to(values, x.shape)


def assemble_load(dofmap: DofMap, source: SourceLike) -> np.ndarray:
    """
    Load vector int f phi_i.

    Args:
        dofmap (DofMap): Test space
        source: Constant, callable f(x, y) or precomputed quadrature values

    Returns:
        np.ndarray: One entry per global dof
    """
    tables = _tables(dofmap)
    basis = tables.values[dofmap.element.degree]
    if isinstance(source, np.ndarray) and source.ndim >= 2:
        values = source
    else:
        values = quadrature_values(dofmap, source)
    if dofmap.is_vector:
        local = np.einsum('tq,tqc,ql->tcl', tables.weights, values, basis)
        return _scatter_vector(dofmap, local.reshape(len(local), -1))
    local = np.einsum('tq,ql->tl', tables.weights * values, basis)
    return _scatter_vector(dofmap, local)


def assemble_flux_load(dofmap: DofMap, flux: np.ndarray) -> np.ndarray:
    """
    Load vector int F . grad phi_i for a vector flux given at quadrature points.

    Args:
        dofmap (DofMap): Scalar test space
        flux (np.ndarray): T x nq x 2 flux values
    """
    _require_scalar(dofmap, "Flux load")
    tables = _tables(dofmap)
    grads = tables.gradients[dofmap.element.degree]
    local = np.einsum('tq,tqa,tqla->tl', tables.weights, flux, grads)
    return _scatter_vector(dofmap, local)


def assemble_gradient_load(dofmap: DofMap, weight: DiscreteField,
                           potential: DiscreteField) -> np.ndarray:
    """
    Vector load int w grad(g) . v_i, e.g. the Coulomb force (q grad phi, v).

    Args:
        dofmap (DofMap): Vector-P2 test space
        weight (DiscreteField): Scalar weight w
        potential (DiscreteField): Scalar field g
    """
    _require_vector(dofmap, "Gradient load")
    require_same_mesh(dofmap, weight, potential)
    tables = _tables(dofmap)
    force = field_values(weight, tables)[..., None] * field_gradients(potential, tables)
    return assemble_load(dofmap, force)


def mean_constraint(pressure_dofmap: DofMap) -> np.ndarray:
    """Row of the zero-mean constraint: l_i = int psi_i."""
    return assemble_load(pressure_dofmap, 1.0)
