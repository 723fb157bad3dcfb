"""Simulation and analysis of heteroclinic switching between localized
frequency-synchrony states in networks of phase-oscillator populations."""

from .errors import (
    BoundaryStructureError,
    ConfigError,
    ConnectionFailure,
    HetsyncError,
    IndeterminatePointError,
    IntegrationError,
    NoCertifiedCycleError,
    NoClosedFormError,
    NotASaddleError,
    ReductionUnavailableError,
    UnsupportedCouplingError,
)
from .model import (
    CO_ROTATING,
    Params,
    eval_G4,
    eval_g2,
    eval_g4,
    full_field,
    lift,
    reduce,
    reduced_field,
    wrap_angles,
)
from .integrate import Trajectory, integrate_em, integrate_reduced_rk4, integrate_rk4

__all__ = [
    "BoundaryStructureError",
    "CO_ROTATING",
    "ConfigError",
    "ConnectionFailure",
    "HetsyncError",
    "IndeterminatePointError",
    "IntegrationError",
    "NoCertifiedCycleError",
    "NoClosedFormError",
    "NotASaddleError",
    "Params",
    "ReductionUnavailableError",
    "Trajectory",
    "UnsupportedCouplingError",
    "eval_G4",
    "eval_g2",
    "eval_g4",
    "full_field",
    "integrate_em",
    "integrate_reduced_rk4",
    "integrate_rk4",
    "lift",
    "reduce",
    "reduced_field",
    "wrap_angles",
]

__version__ = "0.1.0"
