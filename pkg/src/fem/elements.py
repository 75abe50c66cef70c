"""
Lagrange Reference Elements on Triangles

P1 and P2 shape functions written in barycentric coordinates
lambda_0 = 1 - xi - eta, lambda_1 = xi, lambda_2 = eta.

Local numbering:
- P1: vertices 0, 1, 2
- P2: vertices 0, 1, 2, then midpoints of local edges (0,1), (1,2), (2,0)
"""

from dataclasses import dataclass, field

import numpy as np

from mesh.triangulation import LOCAL_EDGES

# Reference gradients of the barycentric coordinates
_GRAD_LAMBDA = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])

_VERTEX_NODES = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


def _barycentric(points: np.ndarray) -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    xi, eta = points[:, 0], points[:, 1]
    return np.column_stack([1.0 - xi - eta, xi, eta])


@dataclass(frozen=True, eq=False)
class ReferenceElement:
    """
    Scalar Lagrange element of degree 1 or 2 on the reference triangle.

    Attributes:
        degree (int): Polynomial degree
        n_local_dofs (int): 3 for P1, 6 for P2
        nodes (np.ndarray): Reference coordinates of the Lagrange nodes
    """
    degree: int
    n_local_dofs: int = field(init=False)
    nodes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.degree not in (1, 2):
            raise ValueError(f"Only P1 and P2 elements are available, got degree {self.degree}")
        if self.degree == 1:
            nodes = _VERTEX_NODES.copy()
        else:
            midpoints = [0.5 * (_VERTEX_NODES[a] + _VERTEX_NODES[b]) for a, b in LOCAL_EDGES]
            nodes = np.vstack([_VERTEX_NODES, midpoints])
        object.__setattr__(self, 'nodes', nodes)
        object.__setattr__(self, 'n_local_dofs', len(nodes))

    def values(self, points: np.ndarray) -> np.ndarray:
        """
        Shape function values.

        Args:
            points (np.ndarray): n x 2 reference points

        Returns:
            np.ndarray: n x n_local_dofs values
        """
        lam = _barycentric(points)
        if self.degree == 1:
            return lam
        vertex = lam * (2.0 * lam - 1.0)
        edge = np.column_stack([4.0 * lam[:, a] * lam[:, b] for a, b in LOCAL_EDGES])
        return np.hstack([vertex, edge])

    def gradients(self, points: np.ndarray) -> np.ndarray:
        """
        Shape function gradients with respect to the reference coordinates.

        Returns:
            np.ndarray: n x n_local_dofs x 2
        """
        lam = _barycentric(points)
        n_pts = len(lam)
        if self.degree == 1:
            return np.broadcast_to(_GRAD_LAMBDA, (n_pts, 3, 2)).copy()
        grads = np.empty((n_pts, 6, 2))
        for i in range(3):
            grads[:, i, :] = (4.0 * lam[:, i] - 1.0)[:, None] * _GRAD_LAMBDA[i]
        for k, (a, b) in enumerate(LOCAL_EDGES):
            grads[:, 3 + k, :] = 4.0 * (lam[:, a, None] * _GRAD_LAMBDA[b]
                                        + lam[:, b, None] * _GRAD_LAMBDA[a])
        return grads


P1 = ReferenceElement(1)
P2 = ReferenceElement(2)


def lagrange_element(degree: int) -> ReferenceElement:
    """Return the shared P1 or P2 reference element."""
    if degree == 1:
        return P1
    if degree == 2:
        return P2
    raise ValueError(f"Only P1 and P2 elements are available, got degree {degree}")
