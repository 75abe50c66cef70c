"""
Time Steppers Package

This package contains the two EHD time steppers and their shared pieces:
- common: Taylor-Hood spaces, problem data, the velocity-pressure solve
- variable_density: second-order extrapolated scheme with time filter
- temperature: first-order decoupled scheme with a temperature equation
"""

from .common import (
    ProblemData,
    SchemeStartupError,
    SchemeStepError,
    SolveRecord,
    StepDiagnostics,
    TaylorHoodSpaces,
    build_spaces,
    dirichlet_data,
    extrapolate,
    solve_flow_system,
    zero_mean,
)
from .variable_density import (
    VdParameters,
    VdState,
    VariableDensityScheme,
    time_filter_values,
)
from .temperature import TempParameters, TempState, TemperatureScheme

__all__ = [
    'ProblemData',
    'SchemeStartupError',
    'SchemeStepError',
    'SolveRecord',
    'StepDiagnostics',
    'TaylorHoodSpaces',
    'build_spaces',
    'dirichlet_data',
    'extrapolate',
    'solve_flow_system',
    'zero_mean',
    'VdParameters',
    'VdState',
    'VariableDensityScheme',
    'time_filter_values',
    'TempParameters',
    'TempState',
    'TemperatureScheme',
]
