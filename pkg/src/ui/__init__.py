"""
UI Module - Command-Line Components

This module provides the terminal output manager and the command-line front
end that configures and launches convergence studies.
"""

from .interface import Colors, UIManager
from .cli import ConfigError, RunConfig, main, parse_args, run_study

__all__ = ['Colors', 'UIManager', 'ConfigError', 'RunConfig', 'main', 'parse_args', 'run_study']
