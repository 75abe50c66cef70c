"""
Convergence Report Serialization

Renders a ConvergenceReport as CSV or as a markdown pipe table and writes it
atomically: the text goes to a temporary sibling that is renamed over the
target only after it is complete.

Formats:
- CSV: header N,err_<field>...,order_<field>...; errors in scientific
  notation with 4 significant digits, orders with 4 decimals, empty order
  cells on the first row
- Markdown: metadata bullets followed by one pipe table with the error and
  order columns of each field side by side
"""

import logging
import os
import tempfile
from enum import Enum
from pathlib import Path
from typing import List, Union

import numpy as np
import pandas as pd

from mms.convergence import ConvergenceReport

logger = logging.getLogger(__name__)


class OutputFormat(Enum):
    """Report file formats."""
    CSV = "csv"
    MARKDOWN = "md"


def _format_error(value: float) -> str:
    return "" if not np.isfinite(value) else f"{value:.3e}"


def _format_order(value: float) -> str:
    return "" if not np.isfinite(value) else f"{value:.4f}"


def _format_index(report: ConvergenceReport, value) -> str:
    return f"{value:.6g}" if report.refinement == "time" else str(int(value))


def format_table(report: ConvergenceReport) -> pd.DataFrame:
    """
    Report table with every cell already formatted as text.

    Returns:
        pd.DataFrame: Same columns as ``report.to_dataframe()``
    """
    table = report.to_dataframe()
    formatted = pd.DataFrame(index=table.index)
    for column in table.columns:
        if column.startswith("err_"):
            formatted[column] = table[column].map(_format_error)
        elif column.startswith("order_"):
            formatted[column] = table[column].map(_format_order)
        else:
            formatted[column] = table[column].map(lambda v: _format_index(report, v))
    return formatted


def render_csv(report: ConvergenceReport) -> str:
    """CSV text of a report."""
    return format_table(report).to_csv(index=False, lineterminator="\n")


def _metadata_lines(report: ConvergenceReport) -> List[str]:
    lines = []
    for key, value in report.metadata.items():
        if isinstance(value, dict):
            value = ", ".join(f"{k}={v}" for k, v in value.items())
        elif isinstance(value, (list, tuple)):
            value = ", ".join(str(v) for v in value)
        lines.append(f"- {key}: {value}")
    return lines


def render_markdown(report: ConvergenceReport) -> str:
    """Markdown text of a report: metadata bullets and one pipe table."""
    table = format_table(report)
    columns = [report.index_label]
    for name in report.fields:
        columns += [f"err_{name}", f"order_{name}"]
    table = table[columns]

    lines = [f"# Convergence of the {report.model} model ({report.refinement} refinement)", ""]
    lines += _metadata_lines(report)
    lines += ["", "| " + " | ".join(columns) + " |",
              "|" + "|".join("---" for _ in columns) + "|"]
    for _, row in table.iterrows():
        lines.append("| " + " | ".join(row[c] for c in columns) + " |")
    for row in report.failed_rows:
        lines.append(f"\nFailed level {row.message}")
    return "\n".join(lines) + "\n"


def render(report: ConvergenceReport, output_format: OutputFormat) -> str:
    """Text of a report in the requested format."""
    if OutputFormat(output_format) is OutputFormat.CSV:
        return render_csv(report)
    return render_markdown(report)


def write_report(report: ConvergenceReport, path: Union[str, Path],
                 output_format: OutputFormat = OutputFormat.CSV) -> Path:
    """
    Write a report atomically.

    Args:
        report (ConvergenceReport): Report to write
        path: Target file; its directory must exist
        output_format (OutputFormat): CSV or markdown

    Returns:
        Path: The written file

    Raises:
        OSError: If the directory is missing or not writable; no file is
            left behind in that case
    """
    path = Path(path)
    text = render(report, output_format)
    logger.info(f"Writing {OutputFormat(output_format).value} report to {path}")

    handle, temp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp",
                                         dir=path.parent if str(path.parent) else ".")
    try:
        with os.fdopen(handle, "w", encoding="utf-8", newline="") as stream:
            stream.write(text)
        os.replace(temp_name, path)
    except BaseException:
        if os.path.exists(temp_name):
            os.unlink(temp_name)
        raise
    return path
