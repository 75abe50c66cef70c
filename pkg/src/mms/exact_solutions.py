"""
Closed-Form Exact Solutions

Smooth fields on the unit square used to verify both schemes. Every field
carries analytic evaluators of its value, time derivative, spatial gradient
and Laplacian, all functions of (x, y, t) that broadcast over numpy arrays.

Both models share the rigid rotation u = (-y cos t, x cos t), which is
divergence free, and the pressure p = sin x sin y sin t.
"""

from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np

# int_0^1 int_0^1 sin x sin y dx dy
SIN_SIN_MEAN = (1.0 - np.cos(1.0)) ** 2


@dataclass(frozen=True)
class ExactField:
    """
    Analytic evaluators of one field.

    Vector fields return tuples: (f1, f2) for values, time derivatives and
    Laplacians, ((f1_x, f1_y), (f2_x, f2_y)) for gradients.

    Attributes:
        name (str): Field name as used by the schemes
        value, time_derivative, gradient, laplacian (Callable): f(x, y, t)
        is_vector (bool): Vector-valued field
        mean (Callable): Optional closed-form spatial mean m(t); errors are
            measured against value - mean for zero-mean fields
    """
    name: str
    value: Callable
    time_derivative: Callable
    gradient: Callable
    laplacian: Callable
    is_vector: bool = False
    mean: Optional[Callable] = None

    def normalized(self) -> Callable:
        """Value with the spatial mean removed (the value itself if no mean)."""
        if self.mean is None:
            return self.value
        return lambda x, y, t: self.value(x, y, t) - self.mean(t)


@dataclass(frozen=True)
class ExactSolution:
    """
    Named exact fields of one model.

    Attributes:
        model (str): "vd" or "temp"
        fields (Dict[str, ExactField]): Field name -> evaluators
    """
    model: str
    fields: Dict[str, ExactField]

    def __getitem__(self, name: str) -> ExactField:
        return self.fields[name]

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(self.fields)

    def at(self, t: float) -> Dict[str, Callable]:
        """Value evaluators f(x, y) frozen at time t."""
        return {name: (lambda x, y, f=f: f.value(x, y, t)) for name, f in self.fields.items()}


def _zeros_like(x, y):
    return np.zeros(np.broadcast(x, y).shape)


def rotation_velocity() -> ExactField:
    """u = (-y cos t, x cos t)."""
    return ExactField(
        name="u",
        value=lambda x, y, t: (-y * np.cos(t) + 0 * x, x * np.cos(t) + 0 * y),
        time_derivative=lambda x, y, t: (y * np.sin(t) + 0 * x, -x * np.sin(t) + 0 * y),
        gradient=lambda x, y, t: ((_zeros_like(x, y), -np.cos(t) + _zeros_like(x, y)),
                                  (np.cos(t) + _zeros_like(x, y), _zeros_like(x, y))),
        laplacian=lambda x, y, t: (_zeros_like(x, y), _zeros_like(x, y)),
        is_vector=True,
    )


def sine_product(name: str, amplitude: float = 1.0, with_mean: bool = False) -> ExactField:
    """a sin x sin y sin t."""
    return ExactField(
        name=name,
        value=lambda x, y, t: amplitude * np.sin(x) * np.sin(y) * np.sin(t),
        time_derivative=lambda x, y, t: amplitude * np.sin(x) * np.sin(y) * np.cos(t),
        gradient=lambda x, y, t: (amplitude * np.cos(x) * np.sin(y) * np.sin(t),
                                  amplitude * np.sin(x) * np.cos(y) * np.sin(t)),
        laplacian=lambda x, y, t: -2.0 * amplitude * np.sin(x) * np.sin(y) * np.sin(t),
        mean=(lambda t: amplitude * SIN_SIN_MEAN * np.sin(t)) if with_mean else None,
    )


def rotating_density() -> ExactField:
    """rho = 2 + x cos(sin t) + y sin(sin t), constant along the rotation."""
    return ExactField(
        name="rho",
        value=lambda x, y, t: 2.0 + x * np.cos(np.sin(t)) + y * np.sin(np.sin(t)),
        time_derivative=lambda x, y, t: np.cos(t) * (-x * np.sin(np.sin(t)) + y * np.cos(np.sin(t))),
        gradient=lambda x, y, t: (np.cos(np.sin(t)) + _zeros_like(x, y),
                                  np.sin(np.sin(t)) + _zeros_like(x, y)),
        laplacian=lambda x, y, t: _zeros_like(x, y),
    )


def tilted_temperature() -> ExactField:
    """theta = (x - y) cos t."""
    return ExactField(
        name="theta",
        value=lambda x, y, t: (x - y) * np.cos(t),
        time_derivative=lambda x, y, t: -(x - y) * np.sin(t),
        gradient=lambda x, y, t: (np.cos(t) + _zeros_like(x, y), -np.cos(t) + _zeros_like(x, y)),
        laplacian=lambda x, y, t: _zeros_like(x, y),
    )


def exact_vd() -> ExactSolution:
    """
    Exact fields of the variable-density model.

    Returns:
        ExactSolution with rho, u, p, rho_e, phi
    """
    return ExactSolution("vd", {
        "rho": rotating_density(),
        "u": rotation_velocity(),
        "p": sine_product("p", with_mean=True),
        "rho_e": sine_product("rho_e", 2.0),
        "phi": sine_product("phi"),
    })


def exact_temp() -> ExactSolution:
    """
    Exact fields of the temperature-dependent model.

    Returns:
        ExactSolution with u, p, q, phi, theta
    """
    return ExactSolution("temp", {
        "u": rotation_velocity(),
        "p": sine_product("p", with_mean=True),
        "q": sine_product("q", 2.0),
        "phi": sine_product("phi"),
        "theta": tilted_temperature(),
    })


def exact_solution(model: str) -> ExactSolution:
    """Exact solution of a model by name ("vd" or "temp")."""
    if model == "vd":
        return exact_vd()
    if model == "temp":
        return exact_temp()
    raise ValueError(f"Unknown model '{model}'")
