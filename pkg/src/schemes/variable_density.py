"""
Variable-Density EHD Time Stepper

Second-order scheme for the coupled density / momentum / charge / potential
system. Every step is linear:

1. Density:    ((rho~ - rho^n)/dt, w) + (div(rho~ u*), w) - 1/2 (rho~ div u*, w) = (s, w)
2. Momentum:   (rho*(u~ - u^n)/dt, v) + (1 + b2) (rho~ (u*.grad) u~, v)
               - (p~, div v) + (div u~, q) + nu (grad u~, grad v) = (f, v)
   Charge:     ((e~ - e^n)/dt, xi) + (div(e~ u*), xi) + 1/Pe (grad e~, grad xi)
               + J0 (e~, xi) = (g, xi)
3. Potential:  (grad phi~, grad psi) = (e~, psi)
4. Filter:     x^{n+1} = x~ - 1/3 (x~ - 2 x^n + x^{n-1})  for rho, u, e, phi

with the extrapolants u* = 2u^n - u^{n-1} and rho* = 2rho^n - rho^{n-1}.
The pressure is not filtered.
"""

import logging
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from fem.dofmap import DiscreteField
from fem.assembly import (
    assemble_conservative_transport,
    assemble_convection,
    assemble_load,
    assemble_mass,
    assemble_stiffness,
)
from fem.boundary import apply_dirichlet
from linalg.sparse_solver import solve
from schemes.common import (
    ProblemData,
    SchemeStartupError,
    SchemeStepError,
    StepDiagnostics,
    TaylorHoodSpaces,
    boundary_node_normals,
    dirichlet_data,
    extrapolate,
    interpolate_field,
    solve_flow_system,
    zero_mean,
)

logger = logging.getLogger(__name__)

VD_FIELDS = ("rho", "u", "p", "rho_e", "phi")
FILTERED_FIELDS = ("rho", "u", "rho_e", "phi")
FILTER_COEFFICIENT = 1.0 / 3.0


@dataclass(frozen=True)
class VdParameters:
    """
    Parameters of the variable-density model.

    Attributes:
        nu (float): Viscosity
        peclet (float): Peclet number of the charge transport
        j0 (float): Charge decay constant
        dt (float): Time step
        t_final (float): Final time
        b2_weight (float): Weight of the second convective form (default 1/4)
        density_inflow_trace (bool): Impose the density trace on inflow dofs
        solver (str): "direct" or "gmres"
    """
    nu: float = 1.0
    peclet: float = 1.0
    j0: float = 1.0
    dt: float = 0.125
    t_final: float = 1.0
    b2_weight: float = 0.25
    density_inflow_trace: bool = False
    solver: str = "direct"

    ALIASES = {"nu": "nu", "Pe": "peclet", "J0": "j0", "inflow": "density_inflow_trace"}

    def __post_init__(self):
        for name in ("nu", "peclet", "j0", "dt", "t_final"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"Parameter '{name}' must be positive, got {value}")
        if self.dt > self.t_final:
            raise ValueError(f"dt={self.dt} exceeds t_final={self.t_final}")
        if self.b2_weight < 0:
            raise ValueError(f"b2_weight must be non-negative, got {self.b2_weight}")
        if self.solver not in ("direct", "gmres"):
            raise ValueError(f"Unknown solver '{self.solver}'")

    @property
    def convection_weight(self) -> float:
        """Combined weight of the two convective forms."""
        return 1.0 + self.b2_weight

    def with_overrides(self, overrides: Mapping[str, object]) -> "VdParameters":
        """
        Validated copy with some fields replaced.

        Keys may be field names or the short aliases nu, Pe, J0, inflow.

        Raises:
            ValueError: On an unknown key or an invalid value
        """
        names = {f.name for f in fields(self)}
        changes = {}
        for key, value in overrides.items():
            name = self.ALIASES.get(key, key)
            if name not in names:
                raise ValueError(f"Unknown variable-density parameter '{key}'")
            if name == "density_inflow_trace":
                value = bool(value)
            changes[name] = value
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)


@dataclass
class VdState:
    """
    Two history levels of the variable-density scheme.

    Attributes:
        spaces (TaylorHoodSpaces): Spaces all fields live in
        level (int): Index n of the current level
        time (float): Time of the current level
        current (dict): Fields at level n
        previous (dict): Fields at level n-1
        provisional (dict): Unfiltered fields of the step in progress
        diagnostics (StepDiagnostics): Residuals of the last step
    """
    spaces: TaylorHoodSpaces
    level: int
    time: float
    current: Dict[str, DiscreteField]
    previous: Dict[str, DiscreteField]
    provisional: Dict[str, DiscreteField] = field(default_factory=dict)
    diagnostics: Optional[StepDiagnostics] = None


def time_filter_values(tilde: np.ndarray, current: np.ndarray, previous: np.ndarray) -> np.ndarray:
    """x~ - 1/3 (x~ - 2 x^n + x^{n-1}) on coefficient arrays."""
    return tilde - FILTER_COEFFICIENT * (tilde - 2.0 * current + previous)


class VariableDensityScheme:
    """
    Time stepper of the variable-density EHD model.

    Attributes:
        spaces (TaylorHoodSpaces): Discrete spaces
        params (VdParameters): Model and step parameters
        problem (ProblemData): Initial data, traces and sources

    Example:
        >>> scheme = VariableDensityScheme(build_spaces(build_unit_square(8)), VdParameters(), problem)
        >>> state = scheme.startup(0.0)
        >>> state = scheme.advance(state)
    """

    def __init__(self, spaces: TaylorHoodSpaces, params: VdParameters, problem: ProblemData):
        self.spaces = spaces
        self.params = params
        self.problem = problem
        self._scalar_mass = assemble_mass(spaces.scalar)
        self._scalar_stiffness = assemble_stiffness(spaces.scalar)
        self._inflow_normals = boundary_node_normals(spaces.scalar)

    # ------------------------------------------------------------------
    # Startup
    # ------------------------------------------------------------------

    def _level_fields(self, t: float) -> Dict[str, DiscreteField]:
        result = {}
        for name in VD_FIELDS:
            if name == "p" and name not in self.problem.fields:
                result[name] = DiscreteField.zeros(self.spaces.pressure, name)
                continue
            result[name] = interpolate_field(self.spaces, name, self.problem.field_at(name, t))
        return result

    def startup(self, t0: float = 0.0, bootstrap: bool = False) -> VdState:
        """
        Build the two starting levels.

        Level n-1 is the interpolant at t0. Level n is the interpolant at
        t0 + dt, or one backward-Euler step when ``bootstrap`` is set.

        Raises:
            SchemeStartupError: If a provider is missing or undefined at a level
        """
        initial = self._level_fields(t0)
        if bootstrap:
            return self.bootstrap(initial, t0)
        following = self._level_fields(t0 + self.params.dt)
        logger.debug(f"Variable-density startup from interpolants at t={t0:g} and t={t0 + self.params.dt:g}")
        return VdState(self.spaces, level=1, time=t0 + self.params.dt,
                       current=following, previous=initial)

    def bootstrap(self, initial: Dict[str, DiscreteField], t0: float = 0.0) -> VdState:
        """
        Level 1 from level 0 by one unfiltered backward-Euler step.

        With both history levels set to level 0 the extrapolants reduce to
        the level-0 fields, so steps 1-3 become a first-order step.
        """
        state = VdState(self.spaces, level=0, time=t0,
                        current=dict(initial), previous=dict(initial))
        diagnostics = self._provisional_step(state)
        state.previous = state.current
        state.current = state.provisional
        state.provisional = {}
        state.level, state.time = 1, t0 + self.params.dt
        state.diagnostics = diagnostics
        logger.debug(f"Variable-density bootstrap step to t={state.time:g}")
        return state

    # ------------------------------------------------------------------
    # Sub-steps
    # ------------------------------------------------------------------

    def _inflow_dofs(self, wind: DiscreteField) -> np.ndarray:
        dofmap = self.spaces.scalar
        wind_nodes = wind.nodal()[dofmap.boundary_nodes]
        flux = np.einsum('na,na->n', wind_nodes, self._inflow_normals)
        return dofmap.boundary_dofs[flux < -1e-12]

    def step_density(self, state: VdState, wind: DiscreteField,
                     diagnostics: Optional[StepDiagnostics] = None) -> DiscreteField:
        """
        Provisional density rho~ transported by the extrapolated wind.

        No boundary condition is imposed unless ``density_inflow_trace`` is
        set, in which case inflow dofs take the exact trace.
        """
        dt = self.params.dt
        t_next = state.time + dt
        rho = state.current["rho"]
        matrix = self._scalar_mass / dt + assemble_conservative_transport(
            self.spaces.scalar, wind, correction=True)
        rhs = self._scalar_mass @ rho.coefficients / dt
        source = self.problem.source_at("density", t_next)
        if source is not None:
            rhs = rhs + assemble_load(self.spaces.scalar, source)

        trace = self.problem.trace_at("rho", t_next)
        if self.params.density_inflow_trace and trace is not None:
            dofs = self._inflow_dofs(wind)
            values = trace(*self.spaces.scalar.node_coords[dofs].T)
            matrix, rhs = apply_dirichlet(matrix, rhs, dofs, values)

        solution = solve(matrix.tocsr(), rhs, self.params.solver)
        if diagnostics is not None:
            diagnostics.add("step_density", "rho", solution)
        return rho.like(solution.x)

    def step_momentum(self, state: VdState, rho_tilde: DiscreteField, wind: DiscreteField,
                      diagnostics: Optional[StepDiagnostics] = None) -> Tuple[DiscreteField, DiscreteField]:
        """
        Provisional velocity and pressure from the monolithic saddle-point solve.

        The second convective form is linearized with the wind u*, so both
        convective forms combine into one matrix weighted by 1 + b2_weight.
        """
        dt = self.params.dt
        t_next = state.time + dt
        velocity = self.spaces.velocity
        rho_star = extrapolate(state.current["rho"], state.previous["rho"])

        weighted_mass = assemble_mass(velocity, rho_star)
        block = (weighted_mass / dt
                 + assemble_convection(velocity, wind, rho_tilde, scale=self.params.convection_weight)
                 + assemble_stiffness(velocity, self.params.nu))
        rhs = weighted_mass @ state.current["u"].coefficients / dt
        source = self.problem.source_at("momentum", t_next)
        if source is not None:
            rhs = rhs + assemble_load(velocity, source)

        u, p, solution = solve_flow_system(
            self.spaces, block.tocsr(), rhs,
            dirichlet_data(self.spaces, self.problem, "u", t_next), self.params.solver)
        if diagnostics is not None:
            diagnostics.add("step_momentum", "u,p", solution)
        return state.current["u"].like(u), state.current["p"].like(p)

    def step_charge(self, state: VdState, wind: DiscreteField,
                    diagnostics: Optional[StepDiagnostics] = None) -> DiscreteField:
        """Provisional charge density: transport, diffusion and decay."""
        dt = self.params.dt
        t_next = state.time + dt
        charge = state.current["rho_e"]
        matrix = (self._scalar_mass * (1.0 / dt + self.params.j0)
                  + assemble_conservative_transport(self.spaces.scalar, wind)
                  + self._scalar_stiffness / self.params.peclet)
        rhs = self._scalar_mass @ charge.coefficients / dt
        source = self.problem.source_at("charge", t_next)
        if source is not None:
            rhs = rhs + assemble_load(self.spaces.scalar, source)

        dofs, values = dirichlet_data(self.spaces, self.problem, "rho_e", t_next)
        matrix, rhs = apply_dirichlet(matrix, rhs, dofs, values)
        solution = solve(matrix, rhs, self.params.solver)
        if diagnostics is not None:
            diagnostics.add("step_charge", "rho_e", solution)
        return charge.like(solution.x)

    def step_potential(self, state: VdState, charge_tilde: DiscreteField,
                       diagnostics: Optional[StepDiagnostics] = None) -> DiscreteField:
        """Provisional potential from the Poisson problem -lap(phi) = rho_e~."""
        t_next = state.time + self.params.dt
        rhs = self._scalar_mass @ charge_tilde.coefficients
        source = self.problem.source_at("potential", t_next)
        if source is not None:
            rhs = rhs + assemble_load(self.spaces.scalar, source)

        dofs, values = dirichlet_data(self.spaces, self.problem, "phi", t_next)
        matrix, rhs = apply_dirichlet(self._scalar_stiffness, rhs, dofs, values)
        solution = solve(matrix, rhs, self.params.solver)
        if diagnostics is not None:
            diagnostics.add("step_potential", "phi", solution)
        return state.current["phi"].like(solution.x)

    def time_filter(self, state: VdState) -> VdState:
        """
        Filter the provisional fields and rotate the history.

        rho, u, rho_e and phi are filtered; the provisional pressure is
        taken as is.
        """
        if not state.provisional:
            raise ValueError("time_filter called without provisional fields")
        filtered = {}
        for name in FILTERED_FIELDS:
            tilde = state.provisional[name]
            filtered[name] = tilde.like(time_filter_values(
                tilde.coefficients,
                state.current[name].coefficients,
                state.previous[name].coefficients,
            ))
        filtered["p"] = state.provisional["p"]

        state.previous = state.current
        state.current = filtered
        state.provisional = {}
        state.level += 1
        state.time += self.params.dt
        return state

    # ------------------------------------------------------------------
    # Full step
    # ------------------------------------------------------------------

    def _run(self, name: str, level: int, func, *args):
        try:
            return func(*args)
        except Exception as e:
            raise SchemeStepError(name, level, e) from e

    def _provisional_step(self, state: VdState) -> StepDiagnostics:
        level = state.level + 1
        diagnostics = StepDiagnostics(level, state.time + self.params.dt)
        wind = extrapolate(state.current["u"], state.previous["u"])

        rho = self._run("step_density", level, self.step_density, state, wind, diagnostics)
        u, p = self._run("step_momentum", level, self.step_momentum, state, rho, wind, diagnostics)
        charge = self._run("step_charge", level, self.step_charge, state, wind, diagnostics)
        phi = self._run("step_potential", level, self.step_potential, state, charge, diagnostics)

        state.provisional = {"rho": rho, "u": u, "p": zero_mean(self.spaces, p),
                             "rho_e": charge, "phi": phi}
        return diagnostics

    def advance(self, state: VdState) -> VdState:
        """
        One full step: density, momentum, charge, potential, then the filter.

        Returns:
            VdState: The same state object at level n+1, with ``diagnostics``
            holding the residual of every solve

        Raises:
            SchemeStepError: Naming the sub-step that failed
        """
        diagnostics = self._provisional_step(state)
        self._run("time_filter", state.level + 1, self.time_filter, state)
        state.diagnostics = diagnostics
        return state

    def run(self, state: VdState, t_final: Optional[float] = None) -> VdState:
        """Advance until the final time (within half a step)."""
        t_final = self.params.t_final if t_final is None else t_final
        while state.time < t_final - 0.5 * self.params.dt:
            self.advance(state)
        return state
