"""Pseudo-spectral simulator and verification harness for the generalized
Camassa-Holm equation with dissipation and dispersion."""

from .core import Grid, ModelParams, ParameterError, Reduction, State, classify_reduction, validate_params
from .dynamics import EvolveOutcome, Status, StepControl, evolve, step_rk4
from .spectral import SpectralWorkspace, workspace_for

__all__ = [
    "EvolveOutcome",
    "Grid",
    "ModelParams",
    "ParameterError",
    "Reduction",
    "SpectralWorkspace",
    "State",
    "Status",
    "StepControl",
    "classify_reduction",
    "evolve",
    "step_rk4",
    "validate_params",
    "workspace_for",
]

__version__ = "0.1.0"
