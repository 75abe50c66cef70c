"""
Tests for flag parsing and the command-line driver.
"""

import importlib
import io
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))

import pytest

from mms import ModelKind
from ui import ConfigError, RunConfig, UIManager, main, parse_args, run_study
from utils import OutputFormat
from linalg import SingularMatrixError


def quiet_ui():
    return UIManager(stream=io.StringIO())


def test_defaults():
    config = parse_args([])
    assert config.model is ModelKind.VD
    assert config.levels == [4, 8, 16, 32]
    assert config.output_format is OutputFormat.CSV
    assert config.out is None
    assert config.study == "space-time"


def test_full_flag_set(tmp_path):
    config = parse_args(["--model", "temp", "--levels", "8,16,32", "--t-final", "0.5",
                         "--dt-ratio", "0.5", "--param", "T=2", "--param", "Pr=3",
                         "--format", "md", "--out", str(tmp_path / "t.md"),
                         "--seed", "11", "--workers", "2", "--verbose", "--study", "time"])
    assert config.model is ModelKind.TEMP
    assert config.levels == [8, 16, 32]
    assert config.t_final == 0.5
    assert config.dt_ratio == 0.5
    assert config.params == {"T": 2.0, "Pr": 3.0}
    assert config.output_format is OutputFormat.MARKDOWN
    assert config.seed == 11
    assert config.workers == 2
    assert config.verbose
    assert config.study == "time"


def test_vd_aliases():
    assert parse_args(["--param", "Pe=2", "--param", "J0=0.5"]).params == {"Pe": 2.0, "J0": 0.5}


@pytest.mark.parametrize("argv,flag", [
    (["--levels", "4,7"], "--levels"),
    (["--levels", "4,eight"], "--levels"),
    (["--levels", "4,,8"], "--levels"),
    (["--levels", ""], "--levels"),
    (["--levels", "0,0"], "--levels"),
    (["--param", "Re=3"], "--param"),
    (["--param", "Pe"], "--param"),
    (["--param", "Pe=fast"], "--param"),
    (["--model", "temp", "--param", "Pe=2"], "--param"),
    (["--t-final", "-1"], "--t-final"),
    (["--dt-ratio", "0"], "--dt-ratio"),
    (["--workers", "0"], "--workers"),
])
def test_invalid_flags_name_the_flag(argv, flag):
    with pytest.raises(ConfigError) as excinfo:
        parse_args(argv)
    assert flag in str(excinfo.value)


def test_unknown_model_is_config_error():
    with pytest.raises(ConfigError):
        parse_args(["--model", "stokes"])


def test_poisson_study_writes_csv(tmp_path):
    out = tmp_path / "poisson.csv"
    config = RunConfig(levels=[4, 8], out=out, study="poisson")
    assert main(config, quiet_ui()) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "N,err_phi,order_phi"
    assert [line.split(",")[0] for line in lines[1:]] == ["4", "8"]


def test_report_to_stdout(capsys):
    config = RunConfig(levels=[2, 4], study="poisson", output_format=OutputFormat.MARKDOWN)
    assert main(config, quiet_ui()) == 0
    assert "| N | err_phi | order_phi |" in capsys.readouterr().out


def test_unwritable_path_exits_one(tmp_path):
    out = tmp_path / "missing" / "poisson.csv"
    assert main(RunConfig(levels=[2, 4], out=out, study="poisson"), quiet_ui()) == 1
    assert not out.exists()
    assert list(tmp_path.iterdir()) == []


def test_failed_level_exits_one(tmp_path):
    config = RunConfig(model=ModelKind.TEMP, levels=[2, 4], t_final=1.0, dt_ratio=0.3,
                       out=tmp_path / "temp.csv")
    assert main(config, quiet_ui()) == 1
    assert (tmp_path / "temp.csv").exists()


def test_invalid_override_exits_two():
    config = RunConfig(model=ModelKind.TEMP, levels=[2, 4], params={"Pr": -1.0})
    assert main(config, quiet_ui()) == 2


def test_metadata_echoes_configuration():
    config = RunConfig(model=ModelKind.TEMP, levels=[2, 4], params={"Pr": 2.0}, seed=5)
    report = run_study(config)
    assert report.complete
    assert report.metadata["overrides"] == {"Pr": 2.0}
    assert report.metadata["parameters"]["prandtl"] == 2.0
    assert report.metadata["seed"] == 5
    assert report.metadata["dt_rule"] == "1*t_final/N"
    assert report.metadata["levels"] == [2, 4]


def test_time_study_uses_finest_mesh():
    report = run_study(RunConfig(model=ModelKind.TEMP, levels=[2, 4], study="time"))
    assert report.refinement == "time"
    assert report.metadata["n_div"] == 4
    assert [row.dt for row in report.rows] == [0.5, 0.25]


def test_inflow_trace_on_by_default_and_switchable():
    assert parse_args(["--param", "inflow=0"]).params == {"inflow": 0.0}
    on = run_study(RunConfig(levels=[2], t_final=0.5))
    off = run_study(RunConfig(levels=[2], t_final=0.5, params={"inflow": 0.0}))
    assert on.metadata["parameters"]["density_inflow_trace"] is True
    assert off.metadata["parameters"]["density_inflow_trace"] is False


def test_failed_poisson_level_exits_one(tmp_path, monkeypatch):
    convergence = importlib.import_module("mms.convergence")

    def singular(n_div):
        raise SingularMatrixError(f"zero pivot at N={n_div}", index=0)

    monkeypatch.setattr(convergence, "poisson_error", singular)
    stream = io.StringIO()
    out = tmp_path / "poisson.csv"
    assert main(RunConfig(levels=[2, 4], out=out, study="poisson"), UIManager(stream=stream)) == 1
    assert "Level N=2: zero pivot" in stream.getvalue()
    assert out.read_text().splitlines()[1] == "2,,"


def test_temp_markdown_columns(tmp_path):
    out = tmp_path / "temp.md"
    config = RunConfig(model=ModelKind.TEMP, levels=[2, 4], output_format=OutputFormat.MARKDOWN, out=out)
    assert main(config, quiet_ui()) == 0
    header = next(line for line in out.read_text().splitlines() if line.startswith("| N |"))
    columns = [cell.strip() for cell in header.strip("|").split("|")]
    expected = ["N"]
    for name in ("u", "p", "q", "phi", "theta"):
        expected += [f"err_{name}", f"order_{name}"]
    assert columns == expected


@pytest.mark.slow
def test_vd_default_csv_shape(tmp_path):
    out = tmp_path / "vd.csv"
    assert main(RunConfig(levels=[4, 8, 16, 32], out=out), quiet_ui()) == 0
    lines = out.read_text().splitlines()
    header = lines[0].split(",")
    assert len(lines) == 5
    assert sum(c.startswith("err_") for c in header) == 5
    assert sum(c.startswith("order_") for c in header) == 5


def test_ascii_table_and_config_echo():
    stream = io.StringIO()
    ui = UIManager(use_unicode=False, stream=stream)
    ui.print_key_value({"levels": "4, 8", "seed": 3})
    ui.print_table(["N", "u"], [["4", "1.000e-02"], ["8", "2.500e-03 (2.00)"]])
    lines = stream.getvalue().splitlines()
    assert lines[0] == "  levels -> 4, 8"
    assert lines[1] == "  seed   -> 3"
    assert lines[2] == "+" + "-" * 22 + "+"
    assert lines[4] == "+---+" + "-" * 18 + "+"
    assert lines[3] == "| N | " + "u".rjust(16) + " |"
    assert lines[6] == "| 8 | 2.500e-03 (2.00) |"
    assert "\033[" not in stream.getvalue()


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
