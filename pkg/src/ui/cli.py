"""
Command-Line Front End

Parses the flags of a convergence study, runs it and writes the report.

Usage:
    python main.py --model vd --levels 4,8,16,32
    python main.py --model temp --levels 8,16,32 --format md --out table.md
    python main.py --model vd --param Pe=2 --param J0=0.5 --workers 4
    python main.py --study poisson --levels 8,16,32
"""

import argparse
import logging
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from mms.convergence import (
    ConvergenceReport,
    ModelKind,
    default_parameters,
    run_convergence,
    run_poisson_study,
    run_time_refinement,
)
from mms.forcing import DEFAULT_SEED, ForcingOracleError, UnverifiedForcingError
from utils.report_writer import OutputFormat, render, write_report
from ui.interface import UIManager

logger = logging.getLogger(__name__)

STUDIES = ("space-time", "time", "poisson")


class ConfigError(ValueError):
    """Invalid command-line configuration; the message names the flag."""


@dataclass
class RunConfig:
    """
    Configuration of one study run.

    Attributes:
        model (ModelKind): Scheme to verify
        levels (List[int]): Mesh subdivisions, each double the previous
        t_final (float): Final time
        dt_ratio (float): dt = dt_ratio * t_final / N
        params (Dict[str, float]): Parameter overrides by name or alias
        output_format (OutputFormat): CSV or markdown
        out (Path): Output file, standard output when None
        seed (int): Seed of the forcing oracle
        workers (int): Levels run in parallel
        verbose (bool): INFO logging
        study (str): "space-time", "time" or "poisson"
    """
    model: ModelKind = ModelKind.VD
    levels: List[int] = field(default_factory=lambda: [4, 8, 16, 32])
    t_final: float = 1.0
    dt_ratio: float = 1.0
    params: Dict[str, float] = field(default_factory=dict)
    output_format: OutputFormat = OutputFormat.CSV
    out: Optional[Path] = None
    seed: int = DEFAULT_SEED
    workers: int = 1
    verbose: bool = False
    study: str = "space-time"


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="main.py",
        description="Convergence studies of the EHD finite-element schemes",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument('--model', choices=[m.value for m in ModelKind], default=ModelKind.VD.value,
                        help='Model to verify (default: vd)')
    parser.add_argument('--levels', default="4,8,16,32", metavar='N,N,...',
                        help='Comma-separated mesh subdivisions, each double the previous')
    parser.add_argument('--t-final', type=float, default=1.0, help='Final time (default: 1)')
    parser.add_argument('--dt-ratio', type=float, default=1.0,
                        help='Time step as a multiple of t_final/N (default: 1)')
    parser.add_argument('--param', action='append', default=[], metavar='KEY=VALUE',
                        help='Parameter override, repeatable (nu, Pe, J0, inflow, T, M, C, alpha, Pr)')
    parser.add_argument('--format', choices=[f.value for f in OutputFormat], default='csv',
                        help='Report format (default: csv)')
    parser.add_argument('--out', type=Path, help='Output file (default: standard output)')
    parser.add_argument('--seed', type=int, default=DEFAULT_SEED, help='Seed of the forcing check')
    parser.add_argument('--workers', type=int, default=1, help='Levels run in parallel')
    parser.add_argument('--verbose', action='store_true', help='Per-solve diagnostics')
    parser.add_argument('--study', choices=STUDIES, default='space-time',
                        help='Refinement study (default: space-time)')
    return parser


def _parse_levels(text: str) -> List[int]:
    items = [item.strip() for item in text.split(",")]
    if any(not item for item in items):
        raise ConfigError(f"--levels: empty level in '{text}'")
    try:
        levels = [int(item) for item in items]
    except ValueError:
        raise ConfigError(f"--levels: non-numeric level in '{text}'") from None
    if levels[0] < 1:
        raise ConfigError(f"--levels: levels must be positive, got {levels[0]}")
    for prev, curr in zip(levels, levels[1:]):
        if curr != 2 * prev:
            raise ConfigError(f"--levels: levels must double ({prev} then {curr})")
    return levels


def _parse_params(items: Sequence[str], model: ModelKind) -> Dict[str, float]:
    overrides = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"--param: expected KEY=VALUE, got '{item}'")
        try:
            overrides[key.strip()] = float(value)
        except ValueError:
            raise ConfigError(f"--param: value of '{key}' is not a number") from None
    try:
        default_parameters(model).with_overrides(overrides)
    except ValueError as e:
        raise ConfigError(f"--param: {e}") from None
    return overrides


def parse_args(argv: Optional[Sequence[str]] = None) -> RunConfig:
    """
    Build a RunConfig from command-line flags.

    Raises:
        ConfigError: Naming the offending flag
    """
    args = _build_parser().parse_args(argv)
    model = ModelKind(args.model)
    for flag, value in (("--t-final", args.t_final), ("--dt-ratio", args.dt_ratio)):
        if not value > 0:
            raise ConfigError(f"{flag}: must be positive, got {value}")
    if args.workers < 1:
        raise ConfigError(f"--workers: must be at least 1, got {args.workers}")

    return RunConfig(
        model=model,
        levels=_parse_levels(args.levels),
        t_final=args.t_final,
        dt_ratio=args.dt_ratio,
        params=_parse_params(args.param, model),
        output_format=OutputFormat(args.format),
        out=args.out,
        seed=args.seed,
        workers=args.workers,
        verbose=args.verbose,
        study=args.study,
    )


def run_study(config: RunConfig) -> ConvergenceReport:
    """Run the study selected by a configuration."""
    if config.study == "poisson":
        return run_poisson_study(config.levels)

    params = replace(default_parameters(config.model).with_overrides(config.params),
                     dt=config.dt_ratio * config.t_final / config.levels[-1],
                     t_final=config.t_final)
    if config.study == "time":
        dt_values = [config.dt_ratio * config.t_final / n for n in config.levels]
        report = run_time_refinement(config.model, config.levels[-1], dt_values, params,
                                     config.seed, config.workers)
    else:
        ratio = config.dt_ratio

        def dt_rule(n: int, t_final: float) -> float:
            return ratio * t_final / n
        dt_rule.description = f"{ratio:g}*t_final/N"

        report = run_convergence(config.model, config.levels, params, dt_rule,
                                 config.seed, config.workers)
    report.metadata["overrides"] = dict(config.params)
    return report


def _summary_rows(report: ConvergenceReport) -> List[List[str]]:
    rows = []
    for row in report.rows:
        label = f"{row.dt:g}" if report.refinement == "time" else str(row.n_div)
        cells = [label]
        for name in report.fields:
            error = row.errors.get(name)
            order = row.orders.get(name)
            cells.append("-" if error is None else f"{error:.3e}"
                         + ("" if order is None else f" ({order:.2f})"))
        rows.append(cells)
    return rows


def _config_summary(config: RunConfig) -> Dict[str, object]:
    summary = {"levels": ", ".join(str(n) for n in config.levels)}
    if config.study != "poisson":
        summary.update({"t_final": config.t_final, "dt": f"{config.dt_ratio:g}*t_final/N",
                        "seed": config.seed})
        if config.params:
            summary["overrides"] = ", ".join(f"{k}={v:g}" for k, v in config.params.items())
    summary["output"] = str(config.out) if config.out else "stdout"
    return summary


def main(config: RunConfig, ui: Optional[UIManager] = None) -> int:
    """
    Run a study, write its report and print a per-level summary.

    Returns:
        int: 0 when every level completed, 1 on a failed level or an I/O
        error, 2 on an invalid configuration or forcing check
    """
    ui = ui or UIManager(width=78, stream=sys.stdout if config.out else sys.stderr)
    model = "poisson" if config.study == "poisson" else config.model.value
    ui.print_header("EHD CONVERGENCE STUDY", f"{config.study} / {model}")
    ui.print_key_value(_config_summary(config))

    try:
        report = run_study(config)
    except (ValueError, ForcingOracleError, UnverifiedForcingError) as e:
        ui.print_error(str(e))
        return 2

    ui.print_table([report.index_label] + list(report.fields), _summary_rows(report))
    for row in report.failed_rows:
        ui.print_error(f"Level {row.message}")

    if config.out is None:
        sys.stdout.write(render(report, config.output_format))
    else:
        try:
            write_report(report, config.out, config.output_format)
        except OSError as e:
            ui.print_error(f"Cannot write report to {config.out}: {e}")
            return 1
        ui.print_info(f"Report written to {config.out}")

    if not report.complete:
        ui.print_error(f"{len(report.failed_rows)} of {len(report.rows)} levels failed")
        return 1
    ui.print_success(f"All {len(report.rows)} levels finished")
    return 0
