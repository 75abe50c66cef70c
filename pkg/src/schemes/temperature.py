"""
Temperature-Dependent EHD Time Stepper

First-order, one-level scheme with three decoupled linear steps per time
level:

1. Flow:     ((u' - u)/dt, v) + ((u.grad) u', v) + (grad p', v) + (grad u', grad v)
             + (T/M)^2 C (q grad phi, v) = (f, v),   (div u', w) = 0
2. Charge and potential, one coupled system:
             ((q' - q)/dt, xi) + T/M^2 (q grad phi', grad xi) - (u q, grad xi)
             + alpha (grad q', grad xi) = (g, xi)
             (q', psi) - 1/C (grad phi', grad psi) = (r, psi)
3. Temperature:
             ((theta' - theta)/dt, s) + (u.grad theta', s) + 1/Pr (grad theta', grad s) = (h, s)

Primes denote level n+1; unprimed fields are level n. The Coulomb force and
the migration weight are lagged, so every system is linear.
"""

import logging
from dataclasses import asdict, dataclass, fields, replace
from typing import Dict, Mapping, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from fem.dofmap import DiscreteField
from fem.assembly import (
    assemble_convection,
    assemble_flux_load,
    assemble_gradient_load,
    assemble_load,
    assemble_mass,
    assemble_stiffness,
    element_tables,
    field_values,
)
from fem.boundary import apply_dirichlet
from linalg.sparse_solver import solve
from schemes.common import (
    ProblemData,
    SchemeStepError,
    StepDiagnostics,
    TaylorHoodSpaces,
    dirichlet_data,
    interpolate_field,
    solve_flow_system,
)

logger = logging.getLogger(__name__)

TEMP_FIELDS = ("u", "p", "q", "phi", "theta")


@dataclass(frozen=True)
class TempParameters:
    """
    Parameters of the temperature-dependent model.

    Attributes:
        t_ratio (float): Electric drift number T
        m (float): Mobility ratio M
        c (float): Gauss-law constant C
        alpha (float): Charge diffusivity
        prandtl (float): Prandtl number
        dt (float): Time step
        t_final (float): Final time
        solver (str): "direct" or "gmres"
    """
    t_ratio: float = 1.0
    m: float = 1.0
    c: float = 1.0
    alpha: float = 1.0
    prandtl: float = 1.0
    dt: float = 0.125
    t_final: float = 1.0
    solver: str = "direct"

    ALIASES = {"T": "t_ratio", "M": "m", "C": "c", "alpha": "alpha", "Pr": "prandtl"}

    def __post_init__(self):
        for name in ("t_ratio", "m", "c", "alpha", "prandtl", "dt", "t_final"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"Parameter '{name}' must be positive, got {value}")
        if self.dt > self.t_final:
            raise ValueError(f"dt={self.dt} exceeds t_final={self.t_final}")
        if self.solver not in ("direct", "gmres"):
            raise ValueError(f"Unknown solver '{self.solver}'")

    @property
    def coulomb(self) -> float:
        """Coulomb force coefficient (T/M)^2 C."""
        return (self.t_ratio / self.m) ** 2 * self.c

    @property
    def migration(self) -> float:
        """Migration coefficient T/M^2."""
        return self.t_ratio / self.m ** 2

    def with_overrides(self, overrides: Mapping[str, object]) -> "TempParameters":
        """
        Validated copy with some fields replaced.

        Keys may be field names or the short aliases T, M, C, alpha, Pr.

        Raises:
            ValueError: On an unknown key or an invalid value
        """
        names = {f.name for f in fields(self)}
        changes = {}
        for key, value in overrides.items():
            name = self.ALIASES.get(key, key)
            if name not in names:
                raise ValueError(f"Unknown temperature-model parameter '{key}'")
            changes[name] = value
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)


@dataclass
class TempState:
    """
    One time level of the temperature-dependent scheme.

    Attributes:
        spaces (TaylorHoodSpaces): Spaces all fields live in
        level (int): Index n
        time (float): Time of level n
        current (dict): Fields u, p, q, phi, theta at level n
        diagnostics (StepDiagnostics): Residuals of the last step
    """
    spaces: TaylorHoodSpaces
    level: int
    time: float
    current: Dict[str, DiscreteField]
    diagnostics: Optional[StepDiagnostics] = None


class TemperatureScheme:
    """
    Time stepper of the temperature-dependent EHD model.

    Attributes:
        spaces (TaylorHoodSpaces): Discrete spaces
        params (TempParameters): Model and step parameters
        problem (ProblemData): Initial data, traces and sources
    """

    def __init__(self, spaces: TaylorHoodSpaces, params: TempParameters, problem: ProblemData):
        self.spaces = spaces
        self.params = params
        self.problem = problem
        self._scalar_mass = assemble_mass(spaces.scalar)
        self._scalar_stiffness = assemble_stiffness(spaces.scalar)
        self._velocity_mass = assemble_mass(spaces.velocity)
        self._velocity_stiffness = assemble_stiffness(spaces.velocity)

    def startup(self, t0: float = 0.0) -> TempState:
        """
        Level 0 by interpolation of the initial fields.

        Raises:
            SchemeStartupError: If a provider is missing or undefined at t0
        """
        current = {}
        for name in TEMP_FIELDS:
            if name == "p" and name not in self.problem.fields:
                current[name] = DiscreteField.zeros(self.spaces.pressure, name)
                continue
            current[name] = interpolate_field(self.spaces, name, self.problem.field_at(name, t0))
        logger.debug(f"Temperature-model startup at t={t0:g}")
        return TempState(self.spaces, level=0, time=t0, current=current)

    def _source(self, equation: str, dofmap, t: float) -> Optional[np.ndarray]:
        source = self.problem.source_at(equation, t)
        return None if source is None else assemble_load(dofmap, source)

    def step_flow(self, state: TempState,
                  diagnostics: Optional[StepDiagnostics] = None) -> Tuple[DiscreteField, DiscreteField]:
        """Velocity and pressure at level n+1 with the lagged Coulomb force."""
        dt = self.params.dt
        t_next = state.time + dt
        velocity = self.spaces.velocity
        u = state.current["u"]

        block = (self._velocity_mass / dt
                 + assemble_convection(velocity, u)
                 + self._velocity_stiffness)
        rhs = (self._velocity_mass @ u.coefficients / dt
               - self.params.coulomb * assemble_gradient_load(
                   velocity, state.current["q"], state.current["phi"]))
        load = self._source("flow", velocity, t_next)
        if load is not None:
            rhs = rhs + load

        u_next, p_next, solution = solve_flow_system(
            self.spaces, block.tocsr(), rhs,
            dirichlet_data(self.spaces, self.problem, "u", t_next), self.params.solver)
        if diagnostics is not None:
            diagnostics.add("step_flow", "u,p", solution)
        return u.like(u_next), state.current["p"].like(p_next)

    def step_charge_potential(self, state: TempState,
                              diagnostics: Optional[StepDiagnostics] = None
                              ) -> Tuple[DiscreteField, DiscreteField]:
        """
        Charge and potential at level n+1 from one coupled 2x2 block system.

        The migration term couples grad(phi') with the known charge q, and the
        charge flux (u q, grad xi) is fully lagged.
        """
        dt = self.params.dt
        t_next = state.time + dt
        scalar = self.spaces.scalar
        q = state.current["q"]
        n = scalar.n_global_dofs

        migration = assemble_stiffness(scalar, self.params.migration, weight=q)
        system = sp.bmat([
            [self._scalar_mass / dt + self.params.alpha * self._scalar_stiffness, migration],
            [self._scalar_mass, -self._scalar_stiffness / self.params.c],
        ], format='csr')

        tables = element_tables(scalar.mesh)
        flux = field_values(q, tables)[..., None] * field_values(state.current["u"], tables)
        rhs_charge = self._scalar_mass @ q.coefficients / dt + assemble_flux_load(scalar, flux)
        rhs_gauss = np.zeros(n)
        for equation, target in (("charge", rhs_charge), ("gauss", rhs_gauss)):
            load = self._source(equation, scalar, t_next)
            if load is not None:
                target += load
        rhs = np.concatenate([rhs_charge, rhs_gauss])

        q_dofs, q_values = dirichlet_data(self.spaces, self.problem, "q", t_next)
        phi_dofs, phi_values = dirichlet_data(self.spaces, self.problem, "phi", t_next)
        system, rhs = apply_dirichlet(system, rhs, q_dofs, q_values)
        system, rhs = apply_dirichlet(system, rhs, phi_dofs, phi_values, offset=n)

        solution = solve(system, rhs, self.params.solver)
        if diagnostics is not None:
            diagnostics.add("step_charge_potential", "q,phi", solution)
        return q.like(solution.x[:n]), state.current["phi"].like(solution.x[n:])

    def step_temperature(self, state: TempState,
                         diagnostics: Optional[StepDiagnostics] = None) -> DiscreteField:
        """Temperature at level n+1 convected by the level-n velocity."""
        dt = self.params.dt
        t_next = state.time + dt
        scalar = self.spaces.scalar
        theta = state.current["theta"]

        matrix = (self._scalar_mass / dt
                  + assemble_convection(scalar, state.current["u"])
                  + self._scalar_stiffness / self.params.prandtl)
        rhs = self._scalar_mass @ theta.coefficients / dt
        load = self._source("temperature", scalar, t_next)
        if load is not None:
            rhs = rhs + load

        dofs, values = dirichlet_data(self.spaces, self.problem, "theta", t_next)
        matrix, rhs = apply_dirichlet(matrix, rhs, dofs, values)
        solution = solve(matrix, rhs, self.params.solver)
        if diagnostics is not None:
            diagnostics.add("step_temperature", "theta", solution)
        return theta.like(solution.x)

    def _run(self, name: str, level: int, func, *args):
        try:
            return func(*args)
        except Exception as e:
            raise SchemeStepError(name, level, e) from e

    def advance(self, state: TempState) -> TempState:
        """
        One step: flow, charge and potential, temperature; then rotate.

        Every sub-step reads level-n fields only.

        Raises:
            SchemeStepError: Naming the sub-step that failed
        """
        level = state.level + 1
        diagnostics = StepDiagnostics(level, state.time + self.params.dt)
        u, p = self._run("step_flow", level, self.step_flow, state, diagnostics)
        q, phi = self._run("step_charge_potential", level, self.step_charge_potential, state, diagnostics)
        theta = self._run("step_temperature", level, self.step_temperature, state, diagnostics)

        state.current = {"u": u, "p": p, "q": q, "phi": phi, "theta": theta}
        state.level = level
        state.time += self.params.dt
        state.diagnostics = diagnostics
        return state

    def run(self, state: TempState, t_final: Optional[float] = None) -> TempState:
        """Advance until the final time (within half a step)."""
        t_final = self.params.t_final if t_final is None else t_final
        while state.time < t_final - 0.5 * self.params.dt:
            self.advance(state)
        return state
