"""
Tests for the variable-density and temperature-dependent time steppers.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))

import numpy as np
import pytest

from mesh import build_unit_square
from fem import (DiscreteField, assemble_gradient_load, assemble_mass, assemble_stiffness,
                 interpolate, l2_error)
from schemes import (
    ProblemData,
    SchemeStartupError,
    SchemeStepError,
    TempParameters,
    TemperatureScheme,
    VariableDensityScheme,
    VdParameters,
    build_spaces,
    dirichlet_data,
    extrapolate,
    solve_flow_system,
    time_filter_values,
)
from mms.convergence import ModelKind, manufactured_problem

zero2 = lambda x, y, t: (0.0 * x, 0.0 * y)
zero = lambda x, y, t: 0.0 * x


def constant(c):
    return lambda x, y, t: c + 0.0 * x


@pytest.fixture(scope="module")
def spaces():
    return build_spaces(build_unit_square(4))


def _max_abs(fields):
    return max(np.max(np.abs(f.coefficients)) for f in fields.values())


# Time filter

def test_filter_fixed_point():
    rng = np.random.default_rng(1)
    current, previous = rng.uniform(size=100), rng.uniform(size=100)
    tilde = 2.0 * current - previous
    assert np.max(np.abs(time_filter_values(tilde, current, previous) - tilde)) <= 1e-15


def test_filter_constants_and_unit_jump():
    c = np.full(5, 3.7)
    np.testing.assert_allclose(time_filter_values(c, c, c), c, rtol=0, atol=1e-15)
    result = time_filter_values(np.ones(1), np.zeros(1), np.zeros(1))
    assert result[0] == pytest.approx(2.0 / 3.0, abs=1e-15)


# Parameters

def test_vd_parameter_validation_and_overrides():
    with pytest.raises(ValueError):
        VdParameters(nu=-1.0)
    with pytest.raises(ValueError):
        VdParameters(dt=2.0, t_final=1.0)
    params = VdParameters().with_overrides({"Pe": 2.0, "J0": 0.5})
    assert params.peclet == 2.0 and params.j0 == 0.5
    assert params.convection_weight == pytest.approx(1.25)
    with pytest.raises(ValueError):
        VdParameters().with_overrides({"Re": 3.0})
    assert VdParameters().with_overrides({"inflow": 1.0}).density_inflow_trace is True
    assert VdParameters(density_inflow_trace=True).with_overrides({"inflow": 0.0}).density_inflow_trace is False


def test_temp_parameter_coefficients():
    params = TempParameters().with_overrides({"T": 2.0, "M": 4.0, "C": 3.0})
    assert params.coulomb == pytest.approx((2.0 / 4.0) ** 2 * 3.0)
    assert params.migration == pytest.approx(2.0 / 16.0)
    with pytest.raises(ValueError):
        TempParameters().with_overrides({"St": 1.0})


# Variable-density scheme

def _vd_zero_problem(**overrides):
    fields = {"rho": zero, "u": zero2, "p": zero, "rho_e": zero, "phi": zero}
    fields.update(overrides)
    return ProblemData(fields=fields)


def test_vd_zero_data_stays_zero(spaces):
    scheme = VariableDensityScheme(spaces, VdParameters(dt=0.25), _vd_zero_problem())
    state = scheme.startup(0.0)
    for _ in range(2):
        state = scheme.advance(state)
    assert state.level == 3
    assert state.time == pytest.approx(0.75)
    assert _max_abs(state.current) == 0.0
    assert len(state.diagnostics.records) == 4


def test_vd_constant_density_at_rest(spaces):
    problem = _vd_zero_problem(rho=constant(2.0))
    scheme = VariableDensityScheme(spaces, VdParameters(dt=0.25), problem)
    state = scheme.advance(scheme.startup(0.0))
    np.testing.assert_allclose(state.current["rho"].coefficients, 2.0, atol=1e-12)
    np.testing.assert_allclose(state.current["u"].coefficients, 0.0, atol=1e-12)


def test_vd_charge_decay_without_boundary_condition(spaces):
    problem = _vd_zero_problem(rho=constant(1.0), rho_e=constant(0.8))
    problem.free_boundary = frozenset({"rho_e"})
    params = VdParameters(dt=0.1, j0=1.0)
    scheme = VariableDensityScheme(spaces, params, problem)
    state = scheme.startup(0.0)
    wind = DiscreteField.zeros(spaces.velocity)
    charge = scheme.step_charge(state, wind)
    np.testing.assert_allclose(charge.coefficients, 0.8 / (1.0 + 0.1), atol=1e-12)


def test_vd_startup_rejects_undefined_provider(spaces):
    undefined_later = lambda x, y, t: 1.0 + 0.0 * x if t == 0.0 else np.nan * x
    scheme = VariableDensityScheme(spaces, VdParameters(dt=0.25), _vd_zero_problem(rho=undefined_later))
    with pytest.raises(SchemeStartupError):
        scheme.startup(0.0)


def test_vd_bootstrap_of_constant_data(spaces):
    problem = _vd_zero_problem(rho=constant(1.5))
    scheme = VariableDensityScheme(spaces, VdParameters(dt=0.25), problem)
    state = scheme.startup(0.0, bootstrap=True)
    assert state.level == 1 and state.time == pytest.approx(0.25)
    np.testing.assert_allclose(state.current["rho"].coefficients, 1.5, atol=1e-12)
    np.testing.assert_allclose(state.previous["rho"].coefficients, 1.5, atol=1e-12)


def test_vd_startup_with_steady_density_has_no_extrapolation_jump(spaces):
    problem = _vd_zero_problem(rho=lambda x, y, t: 1.0 + x * y)
    scheme = VariableDensityScheme(spaces, VdParameters(dt=0.25), problem)
    state = scheme.startup(0.0)
    current, previous = state.current["rho"], state.previous["rho"]
    np.testing.assert_array_equal(current.coefficients, previous.coefficients)
    np.testing.assert_allclose(extrapolate(current, previous).coefficients, current.coefficients,
                               rtol=0, atol=1e-15)


def test_vd_step_error_names_substep(spaces):
    def broken(x, y, t):
        raise ArithmeticError("source undefined")
    problem = _vd_zero_problem(rho=constant(1.0))
    problem.sources = {"momentum": broken}
    scheme = VariableDensityScheme(spaces, VdParameters(dt=0.25), problem)
    state = scheme.startup(0.0)
    with pytest.raises(SchemeStepError) as excinfo:
        scheme.advance(state)
    assert excinfo.value.step == "step_momentum"
    assert excinfo.value.time_level == 2


def test_vd_manufactured_step_is_incompressible_with_zero_mean_pressure(spaces):
    params = VdParameters(dt=0.25)
    scheme = VariableDensityScheme(spaces, params, manufactured_problem(ModelKind.VD, params))
    state = scheme.startup(0.0)
    for _ in range(2):
        wind = 2.0 * state.current["u"].coefficients - state.previous["u"].coefficients
        wind = state.current["u"].like(wind)
        rho = scheme.step_density(state, wind)
        u, p = scheme.step_momentum(state, rho, wind)
        divergence = spaces.divergence @ u.coefficients
        assert np.max(np.abs(divergence)) <= 1e-9 * np.linalg.norm(u.coefficients)
        state = scheme.advance(state)
        assert abs(spaces.pressure_mean_row @ state.current["p"].coefficients) <= 1e-10
        assert state.diagnostics.max_residual <= 1e-8


def test_vd_inflow_trace_variant_runs(spaces):
    params = VdParameters(dt=0.25, density_inflow_trace=True)
    scheme = VariableDensityScheme(spaces, params, manufactured_problem(ModelKind.VD, params))
    state = scheme.run(scheme.startup(0.0))
    assert state.time == pytest.approx(1.0)
    assert np.all(np.isfinite(state.current["rho"].coefficients))


def test_stokes_limit_converges():
    """Constant density, zero history and a huge step: a steady Stokes solve."""
    exact_u = lambda x, y: (-y + 0.0 * x, x + 0.0 * y)
    problem = ProblemData(
        fields={"rho": constant(1.0), "u": zero2, "p": zero, "rho_e": zero, "phi": zero},
        sources={"momentum": lambda x, y, t: (np.cos(x) * np.sin(y), np.sin(x) * np.cos(y))},
        traces={"u": lambda x, y, t: exact_u(x, y)},
    )
    params = VdParameters(nu=1.0, dt=1e12, t_final=1e12)
    errors = []
    for n in (4, 8, 16):
        spaces = build_spaces(build_unit_square(n))
        scheme = VariableDensityScheme(spaces, params, problem)
        state = scheme.startup(0.0)
        state.current = dict(state.previous)
        rho = state.current["rho"]
        u, _ = scheme.step_momentum(state, rho, DiscreteField.zeros(spaces.velocity))
        errors.append(l2_error(u, exact_u))
    assert errors[0] > errors[1] > errors[2]
    assert np.log2(errors[1] / errors[2]) >= 1.8


# Temperature scheme

def _temp_zero_problem(**overrides):
    fields = {"u": zero2, "p": zero, "q": zero, "phi": zero, "theta": zero}
    fields.update(overrides)
    return ProblemData(fields=fields)


def test_temp_zero_data_stays_zero(spaces):
    scheme = TemperatureScheme(spaces, TempParameters(dt=0.25), _temp_zero_problem())
    state = scheme.startup(0.0)
    for _ in range(2):
        state = scheme.advance(state)
    assert state.level == 2
    assert _max_abs(state.current) == 0.0


def test_temp_constant_temperature_is_kept(spaces):
    problem = _temp_zero_problem(theta=constant(0.7))
    problem.traces = {"theta": constant(0.7)}
    scheme = TemperatureScheme(spaces, TempParameters(dt=0.25), problem)
    state = scheme.advance(scheme.startup(0.0))
    np.testing.assert_allclose(state.current["theta"].coefficients, 0.7, atol=1e-12)


def test_temp_flow_step_balances_gradient_force_with_pressure(spaces):
    params = TempParameters(t_ratio=2.0, dt=0.25)
    problem = _temp_zero_problem(q=constant(0.5), phi=lambda x, y, t: x + 2.0 * y)
    scheme = TemperatureScheme(spaces, params, problem)
    state = scheme.startup(0.0)
    u, p = scheme.step_flow(state)

    # q grad(phi) is a gradient: it is taken up by p = -coulomb q phi (zero mean), u stays at rest
    assert np.max(np.abs(u.coefficients)) <= 1e-10
    expected = lambda x, y: -params.coulomb * 0.5 * (x + 2.0 * y - 1.5)
    np.testing.assert_allclose(p.coefficients, interpolate(spaces.pressure, expected).coefficients,
                               atol=1e-9)

    velocity = spaces.velocity
    block = assemble_mass(velocity) / params.dt + assemble_stiffness(velocity)
    rhs = -params.coulomb * assemble_gradient_load(velocity, state.current["q"], state.current["phi"])
    u_ref, p_ref, _ = solve_flow_system(spaces, block.tocsr(), rhs,
                                        dirichlet_data(spaces, problem, "u", params.dt))
    np.testing.assert_allclose(u.coefficients, u_ref, atol=1e-12)
    np.testing.assert_allclose(p.coefficients, p_ref, atol=1e-12)


def test_temp_harmonic_temperature_is_steady(spaces):
    harmonic = lambda x, y, t: x ** 2 - y ** 2
    problem = _temp_zero_problem(theta=harmonic)
    problem.traces = {"theta": harmonic}
    scheme = TemperatureScheme(spaces, TempParameters(dt=0.25, prandtl=2.0), problem)
    state = scheme.startup(0.0)
    before = state.current["theta"].coefficients.copy()
    state = scheme.advance(state)
    np.testing.assert_allclose(state.current["theta"].coefficients, before, atol=1e-10)
    assert state.diagnostics.max_residual <= 1e-10


def test_temp_manufactured_step_invariants(spaces):
    params = TempParameters(dt=0.25)
    scheme = TemperatureScheme(spaces, params, manufactured_problem(ModelKind.TEMP, params))
    state = scheme.startup(0.0)
    state = scheme.advance(state)

    u = state.current["u"].coefficients
    assert np.max(np.abs(spaces.divergence @ u)) <= 1e-9 * np.linalg.norm(u)
    assert abs(spaces.pressure_mean_row @ state.current["p"].coefficients) <= 1e-10

    # Gauss law rows hold at every interior potential test function (C = 1, zero source)
    q, phi = scheme.step_charge_potential(state)
    gauss = assemble_mass(spaces.scalar) @ q.coefficients - assemble_stiffness(spaces.scalar) @ phi.coefficients
    interior = np.setdiff1d(np.arange(spaces.scalar.n_global_dofs), spaces.scalar.boundary_dofs)
    assert np.max(np.abs(gauss[interior])) <= 1e-10


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
