"""Shared pytest setup: source path and markers."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full convergence studies (minutes)")
