"""Anisotropic contracting curvature flows of star-shaped hypersurfaces."""

__version__ = "0.1.0"

from .errors import ConeViolation, DomainError, NonFinite, StabilityError
from .params import FlowParams
from .grid import Grid, RadialField, GeometryState, geometry
from .flow import StepperConfig, RunResult, run, step, rescale_factor, tau
from .diagnostics import DiagnosticsRecord, record, fit_decay

__all__ = [
    "ConeViolation", "DomainError", "NonFinite", "StabilityError",
    "FlowParams", "Grid", "RadialField", "GeometryState", "geometry",
    "StepperConfig", "RunResult", "run", "step", "rescale_factor", "tau",
    "DiagnosticsRecord", "record", "fit_decay",
]
