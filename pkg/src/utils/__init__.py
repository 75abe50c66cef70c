"""
Utilities Package

This package contains report serialization helpers:
- CSV and markdown rendering of convergence reports
- Atomic file writing
"""

from .report_writer import (OutputFormat, format_table, render, render_csv,
                            render_markdown, write_report)

__all__ = [
    'OutputFormat',
    'format_table',
    'render',
    'render_csv',
    'render_markdown',
    'write_report',
]
