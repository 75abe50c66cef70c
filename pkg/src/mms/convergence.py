"""
Convergence Studies

Runs a scheme on the manufactured problem over a sequence of meshes and
collects final-time L2 errors and observed orders.

Key Features:
- Space-time refinement (h = 1/N, dt from a rule, default t_final/N)
- Time-only refinement on a fixed mesh
- Standalone Poisson study for the P2 space
- Optional parallel levels through a process pool; rows are ordered by N
- Every run is gated on forcing sources with a recorded oracle pass
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from mesh.triangulation import build_unit_square
from fem.dofmap import DiscreteField, SpaceKind, build_dofmap
from fem.assembly import assemble_load, assemble_stiffness
from fem.boundary import apply_dirichlet, boundary_values
from fem.norms import l2_error
from linalg.sparse_solver import solve
from schemes.common import ProblemData, build_spaces
from schemes.variable_density import VariableDensityScheme, VdParameters
from schemes.temperature import TemperatureScheme, TempParameters
from mms.exact_solutions import exact_solution
from mms.forcing import DEFAULT_SEED, manufactured_sources, require_verified

logger = logging.getLogger(__name__)

Parameters = Union[VdParameters, TempParameters]


class ModelKind(Enum):
    """Available EHD models."""
    VD = "vd"
    TEMP = "temp"


MODEL_FIELDS = {
    ModelKind.VD: ("rho", "u", "p", "rho_e", "phi"),
    ModelKind.TEMP: ("u", "p", "q", "phi", "theta"),
}

# Fields with Dirichlet data taken from the exact solution
MODEL_TRACES = {
    ModelKind.VD: ("rho", "u", "rho_e", "phi"),
    ModelKind.TEMP: ("u", "q", "phi", "theta"),
}


def default_parameters(model: ModelKind) -> Parameters:
    """
    Default parameters of a model.

    Manufactured variable-density runs impose the exact density trace on
    inflow dofs; ``density_inflow_trace=False`` selects the scheme without a
    boundary term, whose density error grows once inflow dominates.
    """
    if ModelKind(model) is ModelKind.VD:
        return VdParameters(density_inflow_trace=True)
    return TempParameters()


@dataclass
class ConvergenceRow:
    """
    Result of one refinement level.

    Attributes:
        n_div (int): Mesh subdivisions N
        dt (float): Time step
        errors (dict): Field -> L2 error at the final time
        orders (dict): Field -> observed order (None on the first row)
        status (str): "ok" or "failed"
        message (str): Failure description
    """
    n_div: int
    dt: float
    errors: Dict[str, float] = field(default_factory=dict)
    orders: Dict[str, Optional[float]] = field(default_factory=dict)
    status: str = "ok"
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass
class ConvergenceReport:
    """
    Errors and orders of a refinement study.

    Attributes:
        model (str): Model name
        fields (tuple): Reported fields in column order
        rows (list): One ConvergenceRow per level, ordered by refinement
        refinement (str): "space-time", "time" or "poisson"
        metadata (dict): Parameters, dt rule, seed, verified equations
    """
    model: str
    fields: Tuple[str, ...]
    rows: List[ConvergenceRow] = field(default_factory=list)
    refinement: str = "space-time"
    metadata: Dict[str, object] = field(default_factory=dict)

    @property
    def complete(self) -> bool:
        return all(row.ok for row in self.rows)

    @property
    def failed_rows(self) -> List[ConvergenceRow]:
        return [row for row in self.rows if not row.ok]

    @property
    def index_label(self) -> str:
        return "dt" if self.refinement == "time" else "N"

    def finest_orders(self) -> Dict[str, Optional[float]]:
        """Orders of the last row."""
        return dict(self.rows[-1].orders) if self.rows else {}

    def to_dataframe(self) -> pd.DataFrame:
        """
        Numeric table: index column, err_<field>... then order_<field>....

        Missing values (first-row orders, failed levels) are NaN.
        """
        records = []
        for row in self.rows:
            record = {self.index_label: row.dt if self.refinement == "time" else row.n_div}
            for name in self.fields:
                record[f"err_{name}"] = row.errors.get(name, np.nan)
            for name in self.fields:
                order = row.orders.get(name)
                record[f"order_{name}"] = np.nan if order is None else order
            records.append(record)
        columns = ([self.index_label] + [f"err_{f}" for f in self.fields]
                   + [f"order_{f}" for f in self.fields])
        return pd.DataFrame.from_records(records, columns=columns)


def observed_order(e_prev: float, e_curr: float, ratio: float = 2.0) -> Optional[float]:
    """
    Observed order log(e_prev / e_curr) / log(ratio).

    With the default ratio 2 this is log2(e_prev / e_curr).

    Returns:
        float or None: None unless both errors are positive and finite
    """
    if not (np.isfinite(e_prev) and np.isfinite(e_curr)) or e_prev <= 0 or e_curr <= 0:
        return None
    return math.log(e_prev / e_curr) / math.log(ratio)


def _attach_orders(rows: List[ConvergenceRow], fields: Sequence[str],
                   scale: Callable[[ConvergenceRow], float]) -> None:
    for prev, curr in zip(rows, rows[1:]):
        if not (prev.ok and curr.ok):
            continue
        ratio = scale(curr) / scale(prev)
        curr.orders = {name: observed_order(prev.errors[name], curr.errors[name], ratio)
                       for name in fields}


def validate_levels(levels: Sequence[int]) -> List[int]:
    """
    Check that levels increase strictly by power-of-two factors of the first.

    Raises:
        ValueError: On an empty, non-increasing or non-doubling sequence
    """
    levels = [int(n) for n in levels]
    if not levels:
        raise ValueError("At least one level is required")
    if levels[0] < 1:
        raise ValueError(f"Levels must be positive, got {levels[0]}")
    for prev, curr in zip(levels, levels[1:]):
        if curr <= prev:
            raise ValueError(f"Levels must increase strictly: {prev} then {curr}")
    for n in levels[1:]:
        ratio, rest = divmod(n, levels[0])
        if rest or ratio & (ratio - 1):
            raise ValueError(f"Level {n} is not a power-of-two multiple of {levels[0]}")
    return levels


def manufactured_problem(model: ModelKind, params: Parameters, seed: int = DEFAULT_SEED) -> ProblemData:
    """
    Problem data of the manufactured solution: exact initial fields and
    traces, and the oracle-verified sources.

    Raises:
        ForcingOracleError: If a closed-form source fails its check
        UnverifiedForcingError: If a source has no recorded pass
    """
    model = ModelKind(model)
    solution = exact_solution(model.value)
    sources = manufactured_sources(model.value, params, seed)
    require_verified(sources)
    return ProblemData(
        fields={name: solution[name].value for name in MODEL_FIELDS[model]},
        sources=sources,
        traces={name: solution[name].value for name in MODEL_TRACES[model]},
    )


def step_count(t_final: float, dt: float) -> int:
    """
    Number of steps reaching t_final.

    Raises:
        ValueError: If t_final is not an integer multiple of dt
    """
    n_steps = int(round(t_final / dt))
    if n_steps < 1 or abs(n_steps * dt - t_final) > 1e-9 * max(1.0, t_final):
        raise ValueError(f"t_final={t_final} is not a multiple of dt={dt}")
    return n_steps


def run_level(model: ModelKind, n_div: int, params: Parameters,
              seed: int = DEFAULT_SEED) -> ConvergenceRow:
    """
    Run one manufactured problem to ``params.t_final`` and measure errors.

    Failures are caught and reported in the row instead of raised.

    Args:
        model (ModelKind): Which scheme
        n_div (int): Mesh subdivisions
        params: Parameters including dt and t_final
        seed (int): Oracle seed

    Returns:
        ConvergenceRow: Errors (empty orders) or the failure message
    """
    model = ModelKind(model)
    row = ConvergenceRow(n_div=n_div, dt=params.dt)
    try:
        step_count(params.t_final, params.dt)
        problem = manufactured_problem(model, params, seed)
        spaces = build_spaces(build_unit_square(n_div))
        if model is ModelKind.VD:
            scheme = VariableDensityScheme(spaces, params, problem)
        else:
            scheme = TemperatureScheme(spaces, params, problem)
        state = scheme.run(scheme.startup(0.0))

        solution = exact_solution(model.value)
        for name in MODEL_FIELDS[model]:
            exact = solution[name].normalized()
            row.errors[name] = l2_error(state.current[name],
                                        lambda x, y, f=exact: f(x, y, state.time))
        logger.info(f"Level N={n_div} dt={params.dt:g} finished: "
                    + ", ".join(f"{k}={v:.3e}" for k, v in row.errors.items()))
    except Exception as e:
        row.status = "failed"
        row.message = f"N={n_div}: {e}"
        logger.error(f"Level N={n_div} failed: {e}")
    return row


def _run_levels(tasks: List[Tuple], workers: int) -> List[ConvergenceRow]:
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run_level, *zip(*tasks)))
    return [run_level(*task) for task in tasks]


def _metadata(model: ModelKind, params: Parameters, seed: int, **extra) -> Dict[str, object]:
    sources = manufactured_sources(model.value, params, seed)
    require_verified(sources)
    metadata = {
        "model": model.value,
        "parameters": params.to_dict(),
        "t_final": params.t_final,
        "seed": seed,
        "verified_equations": sorted(sources),
    }
    metadata.update(extra)
    return metadata


def run_convergence(model: ModelKind, levels: Sequence[int], params: Optional[Parameters] = None,
                    dt_rule: Optional[Callable[[int, float], float]] = None,
                    seed: int = DEFAULT_SEED, workers: int = 1) -> ConvergenceReport:
    """
    Simultaneous space and time refinement study.

    Args:
        model (ModelKind): Which scheme
        levels (Sequence[int]): Mesh subdivisions, power-of-two multiples of the first
        params: Model parameters (dt is replaced per level)
        dt_rule (Callable): dt_rule(N, t_final) -> dt; default t_final / N
        seed (int): Oracle seed
        workers (int): Levels run in parallel when > 1

    Returns:
        ConvergenceReport: Rows ordered by N

    Raises:
        ValueError: On invalid levels
        ForcingOracleError: If a source fails its check (before any level runs)
    """
    model = ModelKind(model)
    levels = validate_levels(levels)
    params = params or default_parameters(model)
    rule = dt_rule or (lambda n, t_final: t_final / n)
    metadata = _metadata(model, params, seed,
                         dt_rule=getattr(dt_rule, "description", "t_final/N") if dt_rule else "t_final/N",
                         levels=levels)

    tasks = [(model, n, replace(params, dt=rule(n, params.t_final)), seed) for n in levels]
    logger.info(f"Running {model.value} convergence study on levels {levels}")
    rows = sorted(_run_levels(tasks, workers), key=lambda row: row.n_div)
    fields = MODEL_FIELDS[model]
    _attach_orders(rows, fields, scale=lambda row: row.n_div)
    return ConvergenceReport(model.value, fields, rows, "space-time", metadata)


def run_time_refinement(model: ModelKind, n_div: int, dt_values: Sequence[float],
                        params: Optional[Parameters] = None, seed: int = DEFAULT_SEED,
                        workers: int = 1) -> ConvergenceReport:
    """
    Time-only refinement on a fixed mesh; orders use the ratio of steps.

    Args:
        model (ModelKind): Which scheme
        n_div (int): Fixed mesh subdivisions
        dt_values (Sequence[float]): Decreasing time steps
    """
    model = ModelKind(model)
    dt_values = [float(dt) for dt in dt_values]
    if not dt_values or any(b >= a for a, b in zip(dt_values, dt_values[1:])):
        raise ValueError("Time steps must be given in strictly decreasing order")
    params = params or default_parameters(model)
    metadata = _metadata(model, params, seed, n_div=n_div, dt_values=dt_values)

    tasks = [(model, n_div, replace(params, dt=dt), seed) for dt in dt_values]
    rows = _run_levels(tasks, workers)
    fields = MODEL_FIELDS[model]
    _attach_orders(rows, fields, scale=lambda row: 1.0 / row.dt)
    return ConvergenceReport(model.value, fields, rows, "time", metadata)


def poisson_error(n_div: int) -> float:
    """
    L2 error of the P2 solution of -lap(phi) = 2 sin x sin y, phi = sin x sin y
    on the boundary.
    """
    exact = lambda x, y: np.sin(x) * np.sin(y)
    dofmap = build_dofmap(build_unit_square(n_div), SpaceKind.SCALAR_P2)
    matrix = assemble_stiffness(dofmap)
    rhs = assemble_load(dofmap, lambda x, y: 2.0 * np.sin(x) * np.sin(y))
    dofs, values = boundary_values(dofmap, exact)
    matrix, rhs = apply_dirichlet(matrix, rhs, dofs, values)
    phi = solve(matrix, rhs).x
    return l2_error(DiscreteField(dofmap, phi, "phi"), exact)


def _poisson_row(n_div: int) -> ConvergenceRow:
    row = ConvergenceRow(n_div=n_div, dt=0.0)
    try:
        row.errors["phi"] = poisson_error(n_div)
    except Exception as e:
        row.status = "failed"
        row.message = f"N={n_div}: {e}"
        logger.error(f"Poisson level N={n_div} failed: {e}")
    return row


def run_poisson_study(levels: Sequence[int]) -> ConvergenceReport:
    """Spatial convergence of the standalone Poisson problem; failed levels become failed rows."""
    levels = validate_levels(levels)
    rows = [_poisson_row(n) for n in levels]
    _attach_orders(rows, ("phi",), scale=lambda row: row.n_div)
    return ConvergenceReport("poisson", ("phi",), rows, "poisson",
                             {"model": "poisson", "levels": levels})
