"""
Quadrature Rules on the Reference Triangle

Symmetric rules on {(0,0), (1,0), (0,1)}; weights sum to the reference area 1/2.

Available rules:
- degree 2: three edge-midpoint points
- degree 5: seven-point symmetric rule (exact for all monomials up to degree 5)
"""

from dataclasses import dataclass

import numpy as np


class UnsupportedQuadratureError(ValueError):
    """Raised when a quadrature degree without a stored rule is requested."""


@dataclass(frozen=True)
class QuadratureRule:
    """
    Quadrature rule on the reference triangle.

    Attributes:
        degree (int): Polynomial degree integrated exactly
        barycentric (np.ndarray): n x 3 barycentric coordinates of the points
        weights (np.ndarray): n weights, summing to 1/2
    """
    degree: int
    barycentric: np.ndarray
    weights: np.ndarray

    @property
    def points(self) -> np.ndarray:
        """Reference coordinates (xi, eta) = (lambda_1, lambda_2)."""
        return self.barycentric[:, 1:3]

    @property
    def n_points(self) -> int:
        return len(self.weights)

    def integrate(self, func) -> float:
        """Integrate f(xi, eta) over the reference triangle."""
        pts = self.points
        return float(np.dot(self.weights, func(pts[:, 0], pts[:, 1])))


def _orbit(a: float) -> np.ndarray:
    """The three barycentric points (a, a, 1-2a) and their permutations."""
    b = 1.0 - 2.0 * a
    return np.array([[b, a, a], [a, b, a], [a, a, b]])


def quadrature(degree: int = 5) -> QuadratureRule:
    """
    Return the stored quadrature rule of the requested exactness degree.

    Args:
        degree (int): 2 or 5

    Returns:
        QuadratureRule: The rule

    Raises:
        UnsupportedQuadratureError: For any other degree
    """
    if degree == 2:
        bary = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])
        weights = np.full(3, 1.0 / 6.0)
        return QuadratureRule(degree=2, barycentric=bary, weights=weights)

    if degree == 5:
        sqrt15 = np.sqrt(15.0)
        a1 = (6.0 - sqrt15) / 21.0
        a2 = (6.0 + sqrt15) / 21.0
        w1 = (155.0 - sqrt15) / 1200.0
        w2 = (155.0 + sqrt15) / 1200.0
        bary = np.vstack([[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], _orbit(a1), _orbit(a2)])
        # Weights normalized to area 1, scaled to the reference area 1/2
        weights = 0.5 * np.concatenate([[9.0 / 40.0], np.full(3, w1), np.full(3, w2)])
        return QuadratureRule(degree=5, barycentric=bary, weights=weights)

    raise UnsupportedQuadratureError(f"No quadrature rule of degree {degree}; supported: 2, 5")
