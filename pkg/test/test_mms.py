"""
Tests for the exact solutions, the forcing oracle and the convergence studies.
"""

import importlib
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))

import numpy as np
import pytest

from mms import (
    ForcingOracleError,
    ForcingSource,
    ModelKind,
    UnverifiedForcingError,
    default_parameters,
    exact_temp,
    exact_vd,
    forcing,
    observed_order,
    oracle_deviation,
    require_verified,
    run_convergence,
    run_poisson_study,
    run_time_refinement,
    validate_levels,
)
from schemes import TempParameters, VdParameters
from linalg import SingularMatrixError

forcing_module = importlib.import_module("mms.forcing")
convergence_module = importlib.import_module("mms.convergence")

rng = np.random.default_rng(42)
X, Y, T = rng.uniform(0.0, 1.0, size=(3, 20))

VD_EQUATIONS = ("density", "momentum", "charge", "potential")
TEMP_EQUATIONS = ("flow", "charge", "gauss", "temperature")


# Exact solutions

def test_vd_density_at_origin():
    rho = exact_vd()["rho"]
    for t in (0.0, 0.3, 2.0):
        assert rho.value(0.0, 0.0, t) == pytest.approx(2.0)


def test_velocity_is_divergence_free():
    for solution in (exact_vd(), exact_temp()):
        grad = np.asarray(solution["u"].gradient(X, Y, T))
        np.testing.assert_allclose(grad[0, 0] + grad[1, 1], 0.0, atol=1e-15)


def test_temp_fields_at_start():
    solution = exact_temp()
    np.testing.assert_allclose(solution["theta"].value(X, Y, 0.0), X - Y)
    np.testing.assert_allclose(solution["p"].value(X, Y, 0.0), 0.0)


def test_gauss_law_pair():
    solution = exact_temp()
    np.testing.assert_allclose(-solution["phi"].laplacian(X, Y, T), solution["q"].value(X, Y, T),
                               atol=1e-15)


def test_pressure_normalization_has_zero_mean():
    from fem import build_dofmap, interpolate, mean_constraint, SpaceKind
    from mesh import build_unit_square
    dofmap = build_dofmap(build_unit_square(16), SpaceKind.SCALAR_P2)
    normalized = exact_vd()["p"].normalized()
    field = interpolate(dofmap, lambda x, y: normalized(x, y, 0.9))
    assert abs(mean_constraint(dofmap) @ field.coefficients) <= 1e-4


# Forcing and its oracle

@pytest.mark.parametrize("equation", VD_EQUATIONS)
def test_vd_forcing_passes_oracle(equation):
    source = forcing("vd", VdParameters(), equation)
    assert source.verified
    assert source.deviation <= 1e-6


@pytest.mark.parametrize("equation", TEMP_EQUATIONS)
def test_temp_forcing_passes_oracle(equation):
    source = forcing("temp", TempParameters(), equation)
    assert source.verified
    assert source.deviation <= 1e-6


@pytest.mark.parametrize("model,equation", [("vd", "density"), ("vd", "potential"), ("temp", "gauss")])
def test_identically_zero_sources(model, equation):
    params = VdParameters() if model == "vd" else TempParameters()
    np.testing.assert_allclose(forcing(model, params, equation)(X, Y, T), 0.0, atol=1e-14)


def test_vd_momentum_forcing_at_start():
    source = forcing("vd", VdParameters(b2_weight=0.0), "momentum")
    rho = exact_vd()["rho"].value(X, Y, 0.0)
    np.testing.assert_allclose(np.asarray(source(X, Y, 0.0)), [-rho * X, -rho * Y], atol=1e-14)


def test_vd_momentum_forcing_carries_convective_weight():
    params = VdParameters()
    source = forcing("vd", params, "momentum")
    rho = exact_vd()["rho"].value(X, Y, 0.0)
    scale = 1.0 + params.b2_weight
    np.testing.assert_allclose(np.asarray(source(X, Y, 0.0)), [-scale * rho * X, -scale * rho * Y],
                               atol=1e-14)


def test_oracle_detects_wrong_evaluator():
    params = VdParameters()
    right = forcing("vd", params, "charge")
    wrong = lambda x, y, t: np.asarray(right(x, y, t)) + 1e-3
    assert oracle_deviation("vd", params, "charge", evaluator=wrong) > 1e-6


def test_wrong_derivative_raises(monkeypatch):
    monkeypatch.setattr(forcing_module.AnalyticDerivatives, "lap",
                        lambda self, name, x, y, t: np.zeros_like(self.value(name, x, y, t)))
    with pytest.raises(ForcingOracleError) as excinfo:
        forcing("vd", VdParameters(), "charge")
    assert excinfo.value.equation == "charge"


def test_unknown_equation():
    with pytest.raises(ValueError):
        forcing("vd", VdParameters(), "energy")


def test_unverified_sources_are_refused():
    with pytest.raises(UnverifiedForcingError):
        require_verified({"charge": ForcingSource("vd", "charge", lambda x, y, t: 0.0)})
    with pytest.raises(UnverifiedForcingError):
        require_verified({"charge": lambda x, y, t: 0.0})
    require_verified({"charge": forcing("vd", VdParameters(), "charge")})


# Orders

def test_order_arithmetic():
    assert observed_order(1.684e-02, 6.317e-03) == pytest.approx(1.4146, abs=5e-4)
    assert observed_order(4.7142e-05, 2.3607e-05) == pytest.approx(0.9978, abs=5e-4)
    assert observed_order(3e-3, 3e-3) == 0.0
    assert observed_order(0.0, 1e-3) is None
    assert observed_order(1e-3, np.nan) is None


def test_order_is_scale_invariant():
    errors = np.array([1.2e-2, 3.1e-3, 7.7e-4])
    for scale in (1e-6, 3.0, 1e4):
        scaled = scale * errors
        for k in range(1, 3):
            assert observed_order(scaled[k - 1], scaled[k]) == pytest.approx(
                observed_order(errors[k - 1], errors[k]), abs=1e-12)


def test_level_validation():
    assert validate_levels([4, 8, 32]) == [4, 8, 32]
    for bad in ([], [4, 7], [8, 4], [4, 12], [0, 2]):
        with pytest.raises(ValueError):
            validate_levels(bad)


# Studies

def test_poisson_order():
    report = run_poisson_study([8, 16, 32])
    assert report.complete
    assert report.rows[0].orders == {}
    assert report.finest_orders()["phi"] >= 2.8


def test_poisson_failure_becomes_failed_row(monkeypatch):
    solve_level = convergence_module.poisson_error

    def failing(n_div):
        if n_div == 4:
            raise SingularMatrixError("zero pivot", index=7)
        return solve_level(n_div)

    monkeypatch.setattr(convergence_module, "poisson_error", failing)
    report = run_poisson_study([2, 4, 8])
    assert not report.complete
    assert report.failed_rows[0].message.startswith("N=4: ")
    assert report.rows[0].ok and report.rows[2].ok
    assert report.rows[2].orders == {}


def test_vd_defaults_impose_inflow_trace():
    assert default_parameters(ModelKind.VD).density_inflow_trace
    assert not VdParameters().density_inflow_trace


def test_vd_study_without_boundary_term_still_selectable():
    report = run_convergence(ModelKind.VD, [4, 8], VdParameters())
    assert report.complete
    assert report.metadata["parameters"]["density_inflow_trace"] is False
    assert all(np.isfinite(v) for row in report.rows for v in row.errors.values())


def test_vd_study_two_levels():
    report = run_convergence(ModelKind.VD, [4, 8])
    assert report.complete
    coarse, fine = report.rows
    assert [row.n_div for row in report.rows] == [4, 8]
    assert fine.dt == pytest.approx(1.0 / 8)
    for name in ("rho", "u", "p", "rho_e", "phi"):
        assert np.isfinite(fine.errors[name])
        assert fine.errors[name] < coarse.errors[name]
        assert fine.orders[name] is not None
    assert report.metadata["verified_equations"] == sorted(VD_EQUATIONS)
    assert report.metadata["parameters"]["density_inflow_trace"] is True
    frame = report.to_dataframe()
    assert list(frame.columns)[:2] == ["N", "err_rho"]
    assert np.isnan(frame.loc[0, "order_u"])


def test_failed_level_is_reported():
    params = VdParameters(t_final=1.0)
    report = run_convergence(ModelKind.VD, [3], params, dt_rule=lambda n, t: 0.4)
    assert not report.complete
    assert "N=3" in report.failed_rows[0].message


def test_parallel_levels_match_serial():
    serial = run_convergence(ModelKind.TEMP, [2, 4])
    parallel = run_convergence(ModelKind.TEMP, [2, 4], workers=2)
    for a, b in zip(serial.rows, parallel.rows):
        assert a.n_div == b.n_div
        assert a.errors == pytest.approx(b.errors, rel=1e-12)


@pytest.mark.slow
def test_vd_orders():
    report = run_convergence(ModelKind.VD, [4, 8, 16, 32])
    assert report.complete
    orders = report.finest_orders()
    assert 1.7 <= orders["u"] <= 2.3
    for name in ("rho", "rho_e", "phi"):
        assert 1.6 <= orders[name] <= 2.2
    assert orders["p"] >= 1.5


@pytest.mark.slow
def test_temp_orders():
    report = run_convergence(ModelKind.TEMP, [4, 8, 16, 32])
    assert report.complete
    for name, order in report.finest_orders().items():
        assert 0.85 <= order <= 1.15, name


@pytest.mark.slow
def test_temp_time_refinement_is_first_order():
    report = run_time_refinement(ModelKind.TEMP, 16, [0.125, 0.0625])
    assert report.complete
    assert 0.7 <= report.finest_orders()["u"] <= 1.3


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
