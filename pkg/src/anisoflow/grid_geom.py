"""Alias of :mod:`anisoflow.grid` under its contract name."""
from .grid import (GeometryState, Grid, RadialField, check_compatible, d1, d2,  # noqa: F401
                   geometry)
