"""
EHD Finite-Element Convergence Studies - Application

Runs manufactured-solution refinement studies of the two EHD schemes and
writes the error/order tables.

Features:
- Variable-density scheme with time filter (second order)
- Temperature-dependent scheme (first order)
- Space-time, time-only and Poisson refinement studies
- CSV and markdown reports

Usage:
    python main.py --model vd --levels 4,8,16,32
    python main.py --model temp --format md --out table.md
    python main.py --study poisson --levels 8,16,32
"""

import logging
import os
import sys

# Add src to path
sys.path.append(os.path.join(os.path.dirname(__file__), 'src'))

try:
    from ui.cli import ConfigError, main as run_cli, parse_args
except ImportError as e:
    print(f"ERROR: Missing dependencies - {e}")
    print("Install: pip install -r requirements.txt")
    sys.exit(1)


def main():
    """Main entry point."""
    try:
        config = parse_args(sys.argv[1:])
    except ConfigError as e:
        print(f"usage error: {e}", file=sys.stderr)
        sys.exit(2)

    logging.basicConfig(
        level=logging.INFO if config.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        sys.exit(run_cli(config))
    except KeyboardInterrupt:
        print("\nInterrupted.", file=sys.stderr)
        sys.exit(130)


if __name__ == "__main__":
    main()
