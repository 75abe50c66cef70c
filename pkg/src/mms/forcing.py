"""
Manufactured Sources and their Finite-Difference Oracle

Each source is the residual of one continuous equation evaluated on the exact
fields. A residual is written once, against a small derivative interface:

- AnalyticDerivatives reads the closed-form derivative evaluators and gives
  the source used by the schemes
- FiniteDifferenceDerivatives differentiates the field values with central
  differences and gives an independent check of those evaluators

A source is handed out only after both agree at random space-time points.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Union

import numpy as np

from mms.exact_solutions import ExactSolution, exact_solution

logger = logging.getLogger(__name__)

ORACLE_STEP = 1e-4
ORACLE_TOLERANCE = 1e-6
ORACLE_POINTS = 20
DEFAULT_SEED = 20240601


class ForcingOracleError(RuntimeError):
    """Closed-form source and finite-difference residual disagree."""

    def __init__(self, model: str, equation: str, deviation: float):
        super().__init__(f"Forcing for {model}/{equation} fails the finite-difference "
                         f"check: deviation {deviation:.3e} > {ORACLE_TOLERANCE:g}")
        self.model = model
        self.equation = equation
        self.deviation = deviation


class UnverifiedForcingError(RuntimeError):
    """A run was asked to use a source without a recorded oracle pass."""


class AnalyticDerivatives:
    """Derivatives from the closed-form evaluators of an exact solution."""

    def __init__(self, solution: ExactSolution):
        self.solution = solution

    def value(self, name, x, y, t):
        return np.asarray(self.solution[name].value(x, y, t), dtype=float)

    def dt(self, name, x, y, t):
        return np.asarray(self.solution[name].time_derivative(x, y, t), dtype=float)

    def grad(self, name, x, y, t):
        return np.asarray(self.solution[name].gradient(x, y, t), dtype=float)

    def lap(self, name, x, y, t):
        return np.asarray(self.solution[name].laplacian(x, y, t), dtype=float)


class FiniteDifferenceDerivatives(AnalyticDerivatives):
    """Central differences of the field values with step h."""

    def __init__(self, solution: ExactSolution, h: float = ORACLE_STEP):
        super().__init__(solution)
        self.h = h

    def dt(self, name, x, y, t):
        h = self.h
        return (self.value(name, x, y, t + h) - self.value(name, x, y, t - h)) / (2 * h)

    def grad(self, name, x, y, t):
        h = self.h
        gx = (self.value(name, x + h, y, t) - self.value(name, x - h, y, t)) / (2 * h)
        gy = (self.value(name, x, y + h, t) - self.value(name, x, y - h, t)) / (2 * h)
        return np.stack([gx, gy], axis=1 if self.solution[name].is_vector else 0)

    def lap(self, name, x, y, t):
        h = self.h
        return (self.value(name, x + h, y, t) + self.value(name, x - h, y, t)
                + self.value(name, x, y + h, t) + self.value(name, x, y - h, t)
                - 4.0 * self.value(name, x, y, t)) / h ** 2


# ---------------------------------------------------------------------------
# Residuals
# ---------------------------------------------------------------------------

def _advect(d, field, x, y, t):
    """(u . grad) field, componentwise for vector fields."""
    u = d.value("u", x, y, t)
    g = d.grad(field, x, y, t)
    if d.solution[field].is_vector:
        return u[0] * g[:, 0] + u[1] * g[:, 1]
    return u[0] * g[0] + u[1] * g[1]


def _div_u(d, x, y, t):
    g = d.grad("u", x, y, t)
    return g[0, 0] + g[1, 1]


def _vd_density(d, params, x, y, t):
    rho = d.value("rho", x, y, t)
    return d.dt("rho", x, y, t) + _advect(d, "rho", x, y, t) + 0.5 * rho * _div_u(d, x, y, t)


def _vd_momentum(d, params, x, y, t):
    """
    Momentum residual with the convective term scaled by ``params.convection_weight``
    (1 + b2_weight), the same weight the scheme applies to its linearized
    convection; at t = 0 the source is therefore (1 + b2_weight) rho (-x, -y).
    """
    rho = d.value("rho", x, y, t)
    return (rho * d.dt("u", x, y, t)
            + params.convection_weight * rho * _advect(d, "u", x, y, t)
            + d.grad("p", x, y, t)
            - params.nu * d.lap("u", x, y, t))


def _vd_charge(d, params, x, y, t):
    charge = d.value("rho_e", x, y, t)
    return (d.dt("rho_e", x, y, t) + _advect(d, "rho_e", x, y, t)
            + charge * _div_u(d, x, y, t)
            - d.lap("rho_e", x, y, t) / params.peclet
            + params.j0 * charge)


def _vd_potential(d, params, x, y, t):
    return -d.lap("phi", x, y, t) - d.value("rho_e", x, y, t)


def _temp_flow(d, params, x, y, t):
    return (d.dt("u", x, y, t) + _advect(d, "u", x, y, t)
            + d.grad("p", x, y, t) - d.lap("u", x, y, t)
            + params.coulomb * d.value("q", x, y, t) * d.grad("phi", x, y, t))


def _temp_charge(d, params, x, y, t):
    q = d.value("q", x, y, t)
    gq, gphi = d.grad("q", x, y, t), d.grad("phi", x, y, t)
    migration = gq[0] * gphi[0] + gq[1] * gphi[1] + q * d.lap("phi", x, y, t)
    return (d.dt("q", x, y, t) - params.migration * migration
            + _advect(d, "q", x, y, t) + q * _div_u(d, x, y, t)
            - params.alpha * d.lap("q", x, y, t))


def _temp_gauss(d, params, x, y, t):
    return d.value("q", x, y, t) + d.lap("phi", x, y, t) / params.c


def _temp_temperature(d, params, x, y, t):
    return (d.dt("theta", x, y, t) + _advect(d, "theta", x, y, t)
            - d.lap("theta", x, y, t) / params.prandtl)


RESIDUALS: Dict[str, Dict[str, Callable]] = {
    "vd": {
        "density": _vd_density,
        "momentum": _vd_momentum,
        "charge": _vd_charge,
        "potential": _vd_potential,
    },
    "temp": {
        "flow": _temp_flow,
        "charge": _temp_charge,
        "gauss": _temp_gauss,
        "temperature": _temp_temperature,
    },
}


@dataclass(frozen=True)
class ForcingSource:
    """
    A manufactured source and its oracle record.

    Attributes:
        model (str): "vd" or "temp"
        equation (str): Equation name, as looked up by the schemes
        evaluator (Callable): f(x, y, t); vector sources return (f1, f2)
        verified (bool): Passed the finite-difference check
        deviation (float): Largest scaled deviation seen by the check
        seed (int): Seed of the check points
    """
    model: str
    equation: str
    evaluator: Callable
    verified: bool = False
    deviation: float = float("nan")
    seed: int = DEFAULT_SEED

    def __call__(self, x, y, t):
        return self.evaluator(x, y, t)


def _residual_function(model: str, equation: str) -> Callable:
    try:
        return RESIDUALS[model][equation]
    except KeyError:
        raise ValueError(f"Unknown equation '{equation}' for model '{model}'") from None


def oracle_deviation(model: str, params, equation: str, seed: int = DEFAULT_SEED,
                     n_points: int = ORACLE_POINTS, evaluator: Callable = None) -> float:
    """
    Largest deviation |f - f_fd| / (1 + |f|) at random points.

    Points (x, y, t) are drawn uniformly from [0, 1]^3.

    Args:
        model (str): "vd" or "temp"
        params: VdParameters or TempParameters
        equation (str): Equation name
        seed (int): Generator seed
        n_points (int): Number of check points
        evaluator (Callable): Source to check; defaults to the closed form

    Returns:
        float: Maximum scaled deviation over points and components
    """
    solution = exact_solution(model)
    residual = _residual_function(model, equation)
    if evaluator is None:
        analytic = AnalyticDerivatives(solution)
        evaluator = lambda x, y, t: residual(analytic, params, x, y, t)
    x, y, t = np.random.default_rng(seed).uniform(0.0, 1.0, size=(3, n_points))
    closed = np.asarray(evaluator(x, y, t), dtype=float)
    reference = residual(FiniteDifferenceDerivatives(solution), params, x, y, t)
    return float(np.max(np.abs(closed - reference) / (1.0 + np.abs(closed))))


def forcing(model: str, params, equation: str, seed: int = DEFAULT_SEED) -> ForcingSource:
    """
    Closed-form manufactured source of one equation, checked by the oracle.

    Returns:
        ForcingSource: Verified source

    Raises:
        ValueError: If the equation is unknown for the model
        ForcingOracleError: If the closed form disagrees with finite differences
    """
    residual = _residual_function(model, equation)
    analytic = AnalyticDerivatives(exact_solution(model))
    evaluator = lambda x, y, t: residual(analytic, params, x, y, t)
    deviation = oracle_deviation(model, params, equation, seed, evaluator=evaluator)
    if not deviation <= ORACLE_TOLERANCE:
        raise ForcingOracleError(model, equation, deviation)
    logger.info(f"Forcing {model}/{equation} passed the finite-difference check "
                f"(deviation {deviation:.2e})")
    return ForcingSource(model, equation, evaluator, verified=True, deviation=deviation, seed=seed)


def manufactured_sources(model: str, params, seed: int = DEFAULT_SEED) -> Dict[str, ForcingSource]:
    """All verified sources of a model, keyed by equation name."""
    return {equation: forcing(model, params, equation, seed) for equation in RESIDUALS[model]}


def require_verified(sources: Dict[str, Union[ForcingSource, Callable]]) -> None:
    """
    Refuse sources without a recorded oracle pass.

    Raises:
        UnverifiedForcingError: Naming the first unverified equation
    """
    for equation, source in sources.items():
        if not isinstance(source, ForcingSource) or not source.verified:
            raise UnverifiedForcingError(f"Source for '{equation}' has no finite-difference check on record")
