"""
EHD Finite-Element Solver - Source Package

This package contains the mesh, finite-element, linear-algebra, scheme and
verification components of the EHD convergence studies.
"""

__version__ = "1.0.0"
