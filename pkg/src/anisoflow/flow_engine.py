"""Alias of :mod:`anisoflow.flow` under its contract name."""
from .flow import (RunResult, Snapshot, StepperConfig, diffusivity, rescale_factor,  # noqa: F401
                   rhs_normalized, rhs_unnormalized, run, stable_dt, step, tau)
