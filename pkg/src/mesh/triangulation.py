"""
Structured Triangulation Module for the EHD Finite-Element Solver

This module builds and queries uniform triangulations of the unit square
[0, 1] x [0, 1]. Every grid cell is split along its lower-left to upper-right
diagonal, which makes vertex, edge and triangle numbering fully deterministic.

Key Features:
- Uniform N x N grid split into 2N^2 counterclockwise triangles
- Global edge numbering by lexicographic order of sorted vertex pairs
- Boundary edge classification with unit outward normals
- Reference-to-physical affine maps
- Plain-text mesh dump for debugging
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)

# Local edges of a triangle, in the order used by the P2 element:
# edge 0 joins vertices (0, 1), edge 1 joins (1, 2), edge 2 joins (2, 0).
LOCAL_EDGES = ((0, 1), (1, 2), (2, 0))


@dataclass(frozen=True, eq=False)
class Mesh:
    """
    Immutable triangulation of the unit square.

    Attributes:
        n_div (int): Cells per side N; mesh size h = 1/N
        vertices (np.ndarray): (N+1)^2 x 2 vertex coordinates
        triangles (np.ndarray): 2N^2 x 3 vertex indices, counterclockwise
        edges (np.ndarray): E x 2 sorted vertex pairs, lexicographic order
        triangle_edges (np.ndarray): 2N^2 x 3 global edge index of each local edge
        boundary_edges (np.ndarray): indices into ``edges`` lying on the boundary
        boundary_normals (np.ndarray): unit outward normal of each boundary edge
        edge_owners (np.ndarray): E x 2 owning triangles, -1 for the missing
            second owner of a boundary edge
    """
    n_div: int
    vertices: np.ndarray
    triangles: np.ndarray
    edges: np.ndarray
    triangle_edges: np.ndarray
    boundary_edges: np.ndarray
    boundary_normals: np.ndarray
    edge_owners: np.ndarray

    @property
    def h(self) -> float:
        """Mesh size 1/N."""
        return 1.0 / self.n_div

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def signed_areas(self) -> np.ndarray:
        """Signed area of every triangle (positive for counterclockwise)."""
        p = self.vertices[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def centroids(self) -> np.ndarray:
        return self.vertices[self.triangles].mean(axis=1)

    def edge_midpoints(self) -> np.ndarray:
        return self.vertices[self.edges].mean(axis=1)

    def boundary_vertices(self) -> np.ndarray:
        """Sorted indices of vertices lying on the boundary of the square."""
        return np.unique(self.edges[self.boundary_edges].ravel())

    def jacobians(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Affine maps of all triangles at once.

        Returns:
            Tuple of (J, b, |det J|) with shapes (T, 2, 2), (T, 2), (T,)
        """
        p = self.vertices[self.triangles]
        jac = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=2)
        det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
        return jac, p[:, 0].copy(), np.abs(det)

    def dump(self, path: Union[str, Path]) -> Path:
        """
        Write the mesh as plain text for debugging.

        One line ``x y`` per vertex followed by one line ``i j k`` (0-based)
        per triangle.

        Args:
            path: Destination file

        Returns:
            Path of the written file
        """
        path = Path(path)
        with path.open("w", encoding="utf-8") as handle:
            for x, y in self.vertices:
                handle.write(f"{x!r} {y!r}\n")
            for i, j, k in self.triangles:
                handle.write(f"{i} {j} {k}\n")
        logger.debug(f"Mesh with {self.n_vertices} vertices written to {path}")
        return path


def build_unit_square(n_div: int) -> Mesh:
    """
    Build the uniform triangulation of the unit square.

    Vertex (i, j) sits at (i/N, j/N) with global index j*(N+1) + i. Each cell
    is split along the diagonal from its lower-left to its upper-right corner.

    Args:
        n_div (int): Number of cells per side, at least 1

    Returns:
        Mesh: Triangulation with (N+1)^2 vertices, 2N^2 triangles and
        3N^2 + 2N edges

    Raises:
        ValueError: If n_div < 1
    """
    if isinstance(n_div, bool) or int(n_div) != n_div or n_div < 1:
        raise ValueError(f"n_div must be a positive integer, got: {n_div}")
    n = int(n_div)

    coords = np.linspace(0.0, 1.0, n + 1)
    xx, yy = np.meshgrid(coords, coords)
    vertices = np.column_stack([xx.ravel(), yy.ravel()])

    # Cell corners, cells ordered row by row
    i, j = np.meshgrid(np.arange(n), np.arange(n))
    i, j = i.ravel(), j.ravel()
    v00 = j * (n + 1) + i
    v10 = v00 + 1
    v01 = v00 + (n + 1)
    v11 = v01 + 1

    lower = np.column_stack([v00, v10, v11])
    upper = np.column_stack([v00, v11, v01])
    triangles = np.empty((2 * n * n, 3), dtype=np.int64)
    triangles[0::2] = lower
    triangles[1::2] = upper

    # Every local edge as a sorted vertex pair; np.unique sorts rows lexicographically
    local = np.stack([triangles[:, list(pair)] for pair in LOCAL_EDGES], axis=1)
    local = np.sort(local, axis=2)
    edges, inverse = np.unique(local.reshape(-1, 2), axis=0, return_inverse=True)
    triangle_edges = inverse.reshape(-1, 3)

    # Owners: boundary edges are referenced by exactly one triangle
    owners = np.full((len(edges), 2), -1, dtype=np.int64)
    counts = np.zeros(len(edges), dtype=np.int64)
    for tri, edge_ids in enumerate(triangle_edges):
        for edge in edge_ids:
            owners[edge, counts[edge]] = tri
            counts[edge] += 1
    boundary_edges = np.flatnonzero(counts == 1)

    # Outward normals: rotate the edge tangent and orient away from the owner
    a = vertices[edges[boundary_edges, 0]]
    b = vertices[edges[boundary_edges, 1]]
    tangent = b - a
    normals = np.column_stack([tangent[:, 1], -tangent[:, 0]])
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    owner_centroids = vertices[triangles[owners[boundary_edges, 0]]].mean(axis=1)
    inward = owner_centroids - 0.5 * (a + b)
    flip = np.einsum("ij,ij->i", normals, inward) > 0.0
    normals[flip] *= -1.0

    mesh = Mesh(
        n_div=n,
        vertices=vertices,
        triangles=triangles,
        edges=edges,
        triangle_edges=triangle_edges,
        boundary_edges=boundary_edges,
        boundary_normals=normals,
        edge_owners=owners,
    )
    logger.debug(
        f"Unit square mesh N={n}: {mesh.n_vertices} vertices, "
        f"{mesh.n_triangles} triangles, {mesh.n_edges} edges"
    )
    return mesh


def triangle_affine_map(coords: np.ndarray) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    Affine map from the reference triangle {(0,0), (1,0), (0,1)} onto a triangle.

    Args:
        coords (np.ndarray): 3 x 2 vertex coordinates of the physical triangle

    Returns:
        Tuple of (2x2 Jacobian, translation, |det|); x = J @ xi + b
    """
    coords = np.asarray(coords, dtype=float)
    jac = np.column_stack([coords[1] - coords[0], coords[2] - coords[0]])
    return jac, coords[0].copy(), abs(float(np.linalg.det(jac)))


def affine_map(mesh: Mesh, tri_index: int) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    Affine map of one mesh triangle; |det| equals twice its area.

    Raises:
        IndexError: If tri_index is out of range
    """
    if not 0 <= tri_index < mesh.n_triangles:
        raise IndexError(f"Triangle index {tri_index} outside [0, {mesh.n_triangles})")
    return triangle_affine_map(mesh.vertices[mesh.triangles[tri_index]])
