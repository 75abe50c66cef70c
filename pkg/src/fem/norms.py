"""
Error Norms

L2 distance between a discrete field and a closed-form function, integrated
with the degree-5 rule on every triangle.
"""

from typing import Callable

import numpy as np

from fem.dofmap import DiscreteField
from fem.assembly import element_tables, field_values, quadrature_values


def l2_error(field: DiscreteField, exact: Callable) -> float:
    """
    ||field - exact||_0 over the unit square.

    Args:
        field (DiscreteField): Discrete field
        exact (Callable): f(x, y), or (f1, f2)(x, y) for vector fields

    Returns:
        float: Non-negative L2 error
    """
    tables = element_tables(field.mesh, 5)
    diff = field_values(field, tables) - quadrature_values(field.dofmap, exact)
    if diff.ndim == 3:
        squared = np.sum(diff ** 2, axis=-1)
    else:
        squared = diff ** 2
    return float(np.sqrt(max(np.sum(tables.weights * squared), 0.0)))


def l2_norm(field: DiscreteField) -> float:
    """||field||_0."""
    zero = (lambda x, y: (0.0, 0.0)) if field.dofmap.is_vector else (lambda x, y: 0.0)
    return l2_error(field, zero)
