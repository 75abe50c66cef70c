"""
Degree-of-Freedom Maps and Discrete Fields

This module numbers the global degrees of freedom of the three spaces used by
the EHD schemes and stores finite-element coefficient vectors.

Spaces:
- scalar-P1  (pressure M_h): one dof per vertex, (N+1)^2 dofs
- scalar-P2  (rho, rho_e, phi, q, theta in Q_h): vertices then edge midpoints,
  (2N+1)^2 dofs
- vector-P2  (velocity X_h): two interleaved components per P2 node,
  dof 2k + c is component c at node k
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from mesh.triangulation import Mesh
from fem.elements import ReferenceElement, lagrange_element

logger = logging.getLogger(__name__)


class SpaceKind(Enum):
    """Enumeration of the finite-element spaces."""
    SCALAR_P1 = "scalar-P1"
    SCALAR_P2 = "scalar-P2"
    VECTOR_P2 = "vector-P2"


class SpaceMismatchError(ValueError):
    """Raised when fields or dof maps live on different meshes or wrong spaces."""


@dataclass(frozen=True, eq=False)
class DofMap:
    """
    Global numbering of one finite-element space on a mesh.

    Attributes:
        kind (SpaceKind): Space identifier
        mesh (Mesh): Underlying triangulation
        element (ReferenceElement): Scalar reference element
        n_components (int): 1 for scalar spaces, 2 for the vector space
        cell_nodes (np.ndarray): T x n_local node indices per triangle
        node_coords (np.ndarray): Coordinates of every Lagrange node
        boundary_nodes (np.ndarray): Sorted node indices lying on the boundary
    """
    kind: SpaceKind
    mesh: Mesh
    element: ReferenceElement
    n_components: int
    cell_nodes: np.ndarray
    node_coords: np.ndarray
    boundary_nodes: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.node_coords)

    @property
    def n_global_dofs(self) -> int:
        return self.n_nodes * self.n_components

    @property
    def is_vector(self) -> bool:
        return self.n_components == 2

    @property
    def cell_dofs(self) -> np.ndarray:
        """
        Local-to-global table.

        For the vector space the local ordering is blocked by component
        (all component-0 dofs of the element, then all component-1 dofs).
        """
        if not self.is_vector:
            return self.cell_nodes
        return np.hstack([2 * self.cell_nodes, 2 * self.cell_nodes + 1])

    @property
    def boundary_dofs(self) -> np.ndarray:
        if not self.is_vector:
            return self.boundary_nodes
        return np.sort(np.concatenate([2 * self.boundary_nodes, 2 * self.boundary_nodes + 1]))

    def boundary_flags(self) -> np.ndarray:
        flags = np.zeros(self.n_global_dofs, dtype=bool)
        flags[self.boundary_dofs] = True
        return flags

    def component_dofs(self, component: int) -> np.ndarray:
        """Global dofs of one velocity component, ordered by node."""
        if not self.is_vector:
            raise SpaceMismatchError(f"{self.kind.value} has no components")
        return 2 * np.arange(self.n_nodes) + component


def build_dofmap(mesh: Mesh, kind: SpaceKind) -> DofMap:
    """
    Number the dofs of a space on a mesh.

    P2 node k < V is vertex k; node V + e is the midpoint of global edge e.

    Args:
        mesh (Mesh): Triangulation
        kind (SpaceKind): Requested space

    Returns:
        DofMap: The numbering
    """
    kind = SpaceKind(kind)
    boundary_vertices = mesh.boundary_vertices()

    if kind is SpaceKind.SCALAR_P1:
        element = lagrange_element(1)
        cell_nodes = mesh.triangles.copy()
        node_coords = mesh.vertices.copy()
        boundary_nodes = boundary_vertices
    else:
        element = lagrange_element(2)
        n_vertices = mesh.n_vertices
        cell_nodes = np.hstack([mesh.triangles, n_vertices + mesh.triangle_edges])
        node_coords = np.vstack([mesh.vertices, mesh.edge_midpoints()])
        boundary_nodes = np.concatenate([boundary_vertices, n_vertices + mesh.boundary_edges])
        boundary_nodes.sort()

    dofmap = DofMap(
        kind=kind,
        mesh=mesh,
        element=element,
        n_components=2 if kind is SpaceKind.VECTOR_P2 else 1,
        cell_nodes=cell_nodes,
        node_coords=node_coords,
        boundary_nodes=boundary_nodes,
    )
    logger.debug(f"{kind.value} dof map on N={mesh.n_div}: {dofmap.n_global_dofs} dofs")
    return dofmap


@dataclass(eq=False)
class DiscreteField:
    """
    Finite-element function: a dof map plus its coefficient vector.

    Attributes:
        dofmap (DofMap): Space the field lives in
        coefficients (np.ndarray): One real per global dof
        name (str): Optional field label used in diagnostics
    """
    dofmap: DofMap
    coefficients: np.ndarray
    name: str = ""

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=float).copy()
        if self.coefficients.shape != (self.dofmap.n_global_dofs,):
            raise SpaceMismatchError(
                f"Field '{self.name}' has {self.coefficients.size} coefficients, "
                f"space {self.dofmap.kind.value} needs {self.dofmap.n_global_dofs}"
            )

    @classmethod
    def zeros(cls, dofmap: DofMap, name: str = "") -> "DiscreteField":
        return cls(dofmap, np.zeros(dofmap.n_global_dofs), name)

    @property
    def mesh(self) -> Mesh:
        return self.dofmap.mesh

    def copy(self, name: Optional[str] = None) -> "DiscreteField":
        return DiscreteField(self.dofmap, self.coefficients, self.name if name is None else name)

    def like(self, coefficients: np.ndarray) -> "DiscreteField":
        """New field on the same space with other coefficients."""
        return DiscreteField(self.dofmap, coefficients, self.name)

    def nodal(self) -> np.ndarray:
        """Coefficients as n_nodes (scalar) or n_nodes x 2 (vector)."""
        if self.dofmap.is_vector:
            return self.coefficients.reshape(-1, 2)
        return self.coefficients


def interpolate(dofmap: DofMap, func: Callable, name: str = "") -> DiscreteField:
    """
    Nodal interpolation of a function.

    Args:
        dofmap (DofMap): Target space
        func (Callable): f(x, y) for scalar spaces, returning (f1, f2) for the
            vector space; constants are broadcast
        name (str): Field label

    Returns:
        DiscreteField: The interpolant
    """
    x, y = dofmap.node_coords[:, 0], dofmap.node_coords[:, 1]
    values = func(x, y)
    if not dofmap.is_vector:
        return DiscreteField(dofmap, np.broadcast_to(values, x.shape), name)
    coefficients = np.empty(dofmap.n_global_dofs)
    coefficients[0::2] = np.broadcast_to(values[0], x.shape)
    coefficients[1::2] = np.broadcast_to(values[1], x.shape)
    return DiscreteField(dofmap, coefficients, name)


def require_same_mesh(*items) -> Mesh:
    """
    Check that dof maps / fields share one mesh and return it.

    Raises:
        SpaceMismatchError: If two items live on different meshes
    """
    meshes = [item.mesh for item in items if item is not None]
    for other in meshes[1:]:
        if other is not meshes[0]:
            raise SpaceMismatchError("Operands live on different meshes")
    return meshes[0]
