"""
Mesh Package

Uniform triangulations of the unit square used by every finite-element space:
- Mesh construction with deterministic vertex, edge and triangle numbering
- Boundary classification and outward normals
- Reference-to-physical affine maps
"""

from .triangulation import Mesh, build_unit_square, affine_map, triangle_affine_map, LOCAL_EDGES

__all__ = [
    'Mesh',
    'build_unit_square',
    'affine_map',
    'triangle_affine_map',
    'LOCAL_EDGES'
]
