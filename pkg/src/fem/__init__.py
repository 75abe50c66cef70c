"""
Finite-Element Core Package

This package contains the discretization machinery shared by both schemes:
- Quadrature rules and P1/P2 Lagrange reference elements
- Degree-of-freedom maps for scalar-P1, scalar-P2 and vector-P2 spaces
- Vectorized assembly of mass, stiffness, convection, divergence and
  transport forms plus load vectors
- Dirichlet rows and L2 error evaluation
"""

from .quadrature import QuadratureRule, quadrature, UnsupportedQuadratureError
from .elements import ReferenceElement, lagrange_element, P1, P2
from .dofmap import (DofMap, DiscreteField, SpaceKind, SpaceMismatchError,
                     build_dofmap, interpolate, require_same_mesh)
from .assembly import (
    assemble_mass,
    assemble_stiffness,
    assemble_convection,
    assemble_divergence,
    assemble_conservative_transport,
    assemble_load,
    assemble_flux_load,
    assemble_gradient_load,
    mean_constraint,
    element_tables,
    field_values,
    field_gradients,
    field_divergence,
)
from .boundary import apply_dirichlet, boundary_values, DirichletConflictError
from .norms import l2_error, l2_norm

__all__ = [
    'QuadratureRule', 'quadrature', 'UnsupportedQuadratureError',
    'ReferenceElement', 'lagrange_element', 'P1', 'P2',
    'DofMap', 'DiscreteField', 'SpaceKind', 'SpaceMismatchError',
    'build_dofmap', 'interpolate', 'require_same_mesh',
    'assemble_mass', 'assemble_stiffness', 'assemble_convection',
    'assemble_divergence', 'assemble_conservative_transport',
    'assemble_load', 'assemble_flux_load', 'assemble_gradient_load',
    'mean_constraint', 'element_tables', 'field_values', 'field_gradients',
    'field_divergence',
    'apply_dirichlet', 'boundary_values', 'DirichletConflictError',
    'l2_error', 'l2_norm'
]
