"""Mittag-Leffler Levy processes: simulation, analytic formulas and statistical checks."""

__version__ = "0.1.0"

from .errors import (ConfigError, DomainError, EfficiencyWarning, EmptySample, IntegrationFailure,
                     NonMonotoneCDF, PoleError, TermCapExceeded)
from .process import ProcessParams, SamplePath, TemperedParams, TimeGrid
from .randvar import RandomSource
from .specfun import SeriesConfig

__all__ = [
    "ConfigError", "DomainError", "EfficiencyWarning", "EmptySample", "IntegrationFailure",
    "NonMonotoneCDF", "PoleError", "ProcessParams", "RandomSource", "SamplePath", "SeriesConfig",
    "TemperedParams", "TermCapExceeded", "TimeGrid", "__version__",
]
