"""
Shared Building Blocks of the EHD Time Steppers

This module holds what both schemes need:
- Taylor-Hood spaces (vector-P2 velocity, scalar-P1 pressure, scalar-P2 fields)
- ProblemData: initial fields, boundary traces and sources as (x, y, t) callables
- The monolithic velocity-pressure solve with a zero-mean pressure multiplier
- Diagnostics records and the per-solve log line
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, FrozenSet, List, Mapping, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from mesh.triangulation import Mesh
from fem.dofmap import DofMap, DiscreteField, SpaceKind, build_dofmap, interpolate
from fem.assembly import assemble_divergence, mean_constraint
from fem.boundary import apply_dirichlet
from linalg.sparse_solver import LinearSolution, SparseMatrix, solve

logger = logging.getLogger(__name__)

SpaceTimeFunction = Callable[..., object]


class SchemeStepError(RuntimeError):
    """
    Failure inside one sub-step of a time stepper.

    Attributes:
        step (str): Sub-step name (e.g. "step_momentum")
        time_level (int): Level being computed
    """

    def __init__(self, step: str, time_level: int, cause: Exception):
        super().__init__(f"{step} failed at level {time_level}: {cause}")
        self.step = step
        self.time_level = time_level


class SchemeStartupError(ValueError):
    """Raised when the starting levels cannot be built from the providers."""


@dataclass
class TaylorHoodSpaces:
    """
    Finite-element spaces of both models on one mesh.

    Attributes:
        mesh (Mesh): Triangulation
        velocity (DofMap): vector-P2 space X_h
        pressure (DofMap): scalar-P1 space M_h
        scalar (DofMap): scalar-P2 space Q_h
    """
    mesh: Mesh
    velocity: DofMap
    pressure: DofMap
    scalar: DofMap

    @cached_property
    def divergence(self) -> SparseMatrix:
        return assemble_divergence(self.velocity, self.pressure)

    @cached_property
    def pressure_mean_row(self) -> np.ndarray:
        return mean_constraint(self.pressure)

    def space_of(self, name: str) -> DofMap:
        if name == "u":
            return self.velocity
        if name == "p":
            return self.pressure
        return self.scalar


def build_spaces(mesh: Mesh) -> TaylorHoodSpaces:
    """Build the vector-P2 / scalar-P1 / scalar-P2 spaces on a mesh."""
    return TaylorHoodSpaces(
        mesh=mesh,
        velocity=build_dofmap(mesh, SpaceKind.VECTOR_P2),
        pressure=build_dofmap(mesh, SpaceKind.SCALAR_P1),
        scalar=build_dofmap(mesh, SpaceKind.SCALAR_P2),
    )


@dataclass
class ProblemData:
    """
    Data of one run, every entry a function of (x, y, t).

    Attributes:
        fields (Mapping): Field name -> initial/exact evaluator
        sources (Mapping): Equation name -> source evaluator
        traces (Mapping): Field name -> Dirichlet trace evaluator; fields
            without an entry get the homogeneous condition
        free_boundary (FrozenSet[str]): Fields left without Dirichlet condition
    """
    fields: Mapping[str, SpaceTimeFunction] = field(default_factory=dict)
    sources: Mapping[str, SpaceTimeFunction] = field(default_factory=dict)
    traces: Mapping[str, SpaceTimeFunction] = field(default_factory=dict)
    free_boundary: FrozenSet[str] = frozenset()

    @staticmethod
    def _at(func: SpaceTimeFunction, t: float) -> Callable:
        return lambda x, y: func(x, y, t)

    def field_at(self, name: str, t: float) -> Callable:
        if name not in self.fields:
            raise SchemeStartupError(f"No provider for field '{name}'")
        return self._at(self.fields[name], t)

    def source_at(self, equation: str, t: float) -> Optional[Callable]:
        func = self.sources.get(equation)
        return None if func is None else self._at(func, t)

    def trace_at(self, name: str, t: float) -> Optional[Callable]:
        func = self.traces.get(name)
        return None if func is None else self._at(func, t)


@dataclass
class SolveRecord:
    """One linear solve: which field, and the recomputed residual."""
    step: str
    field: str
    residual: float


@dataclass
class StepDiagnostics:
    """Residuals of all solves of one time step."""
    level: int
    time: float
    records: List[SolveRecord] = field(default_factory=list)

    def add(self, step: str, field_name: str, solution: LinearSolution) -> None:
        self.records.append(SolveRecord(step, field_name, solution.residual))
        logger.info(f"step={self.level} t={self.time:.6g} field={field_name} "
                    f"residual={solution.residual:.3e}")

    @property
    def max_residual(self) -> float:
        return max((r.residual for r in self.records), default=0.0)


def interpolate_field(spaces: TaylorHoodSpaces, name: str, func: Callable) -> DiscreteField:
    """
    Interpolate a provider into the space of a named field.

    The pressure interpolant is shifted to zero mean. Non-finite values (a
    provider undefined at the requested time) raise SchemeStartupError.
    """
    dofmap = spaces.space_of(name)
    try:
        result = interpolate(dofmap, func, name)
    except Exception as e:
        raise SchemeStartupError(f"Provider for '{name}' failed: {e}") from e
    if not np.all(np.isfinite(result.coefficients)):
        raise SchemeStartupError(f"Provider for '{name}' returned non-finite values")
    if name == "p":
        result = zero_mean(spaces, result)
    return result


def zero_mean(spaces: TaylorHoodSpaces, pressure: DiscreteField) -> DiscreteField:
    """Shift a P1 pressure by a constant so that its integral vanishes."""
    row = spaces.pressure_mean_row
    mean = float(row @ pressure.coefficients) / float(row.sum())
    return pressure.like(pressure.coefficients - mean)


def extrapolate(current: DiscreteField, previous: DiscreteField) -> DiscreteField:
    """Second-order extrapolant 2 x^n - x^(n-1)."""
    return current.like(2.0 * current.coefficients - previous.coefficients)


def dirichlet_data(spaces: TaylorHoodSpaces, problem: ProblemData, name: str,
                   t: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Constrained dofs and values of a field at time t.

    Exact traces when the problem provides one, zero otherwise; no dofs for
    fields listed in ``free_boundary``.
    """
    dofmap = spaces.space_of(name)
    if name in problem.free_boundary:
        return np.empty(0, dtype=np.int64), np.empty(0)
    dofs = dofmap.boundary_dofs
    trace = problem.trace_at(name, t)
    if trace is None:
        return dofs, np.zeros(dofs.size)
    return dofs, interpolate(dofmap, trace).coefficients[dofs]


def solve_flow_system(spaces: TaylorHoodSpaces, velocity_block: SparseMatrix,
                      velocity_rhs: np.ndarray, velocity_dirichlet: Tuple[np.ndarray, np.ndarray],
                      solver: str = "direct") -> Tuple[np.ndarray, np.ndarray, LinearSolution]:
    """
    Monolithic Taylor-Hood solve with a zero-mean pressure multiplier.

    Solves
        [ A   -B^T  0 ] [u]   [f]
        [ B    0    l ] [p] = [0]
        [ 0    l^T  0 ] [m]   [0]
    where B is the discrete divergence and l_i = int psi_i; velocity boundary
    rows are replaced by Dirichlet rows.

    Returns:
        Tuple of (velocity coefficients, pressure coefficients, LinearSolution)
    """
    divergence = spaces.divergence
    n_u = spaces.velocity.n_global_dofs
    n_p = spaces.pressure.n_global_dofs
    mean_col = sp.csr_matrix(spaces.pressure_mean_row.reshape(-1, 1))

    system = sp.bmat([
        [velocity_block, -divergence.T, sp.csr_matrix((n_u, 1))],
        [divergence, None, mean_col],
        [None, mean_col.T, None],
    ], format='csr')
    rhs = np.concatenate([velocity_rhs, np.zeros(n_p + 1)])

    dofs, values = velocity_dirichlet
    system, rhs = apply_dirichlet(system, rhs, dofs, values)
    solution = solve(system, rhs, solver)
    x = solution.x
    return x[:n_u], x[n_u:n_u + n_p], solution


def boundary_node_normals(dofmap: DofMap) -> np.ndarray:
    """
    Outward normals at the boundary nodes of a P2 space.

    Vertex nodes get the (unnormalized) sum of the normals of their boundary
    edges, so corners point diagonally outward.

    Returns:
        np.ndarray: len(boundary_nodes) x 2
    """
    mesh = dofmap.mesh
    normals = np.zeros((dofmap.n_nodes, 2))
    edges = mesh.edges[mesh.boundary_edges]
    for k in range(2):
        np.add.at(normals, edges[:, k], mesh.boundary_normals)
    if dofmap.element.degree == 2:
        normals[mesh.n_vertices + mesh.boundary_edges] = mesh.boundary_normals
    return normals[dofmap.boundary_nodes]
