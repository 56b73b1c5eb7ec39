"""Grids on the parameter circle / polar angle and radial-graph geometry.

A star-shaped hypersurface is stored as phi = log r over one angular
variable: the full circle for curves in the plane (n = 1), or the polar
angle theta in [0, pi] for hypersurfaces of revolution in R^(n+1).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels
from .errors import DomainError
from .params import FlowParams

KINDS = ("periodic-circle", "axisym-polar")


@dataclass(frozen=True)
class Grid:
    kind: str
    m: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown grid kind {self.kind!r}; expected one of {KINDS}")
        if int(self.m) != self.m or self.m < 8:
            raise DomainError(f"grid needs at least 8 nodes, got {self.m}")
        object.__setattr__(self, "m", int(self.m))

    @property
    def axisym(self) -> bool:
        return self.kind == "axisym-polar"

    @property
    def h(self) -> float:
        return (np.pi if self.axisym else 2 * np.pi) / self.m

    @cached_property
    def nodes(self) -> np.ndarray:
        i = np.arange(self.m, dtype=float)
        return (i + 0.5) * self.h if self.axisym else i * self.h

    @cached_property
    def cot(self) -> np.ndarray:
        # only used on the polar grid, where no node sits on a pole
        if not self.axisym:
            return np.zeros(self.m)
        return 1.0 / np.tan(self.nodes)

    @classmethod
    def for_params(cls, params: FlowParams, m: int) -> "Grid":
        return cls(params.grid_kind, m)


@dataclass
class RadialField:
    grid: Grid
    phi: np.ndarray

    def __post_init__(self):
        self.phi = np.array(self.phi, dtype=float)
        if self.phi.shape != (self.grid.m,):
            raise DomainError(f"phi must have {self.grid.m} entries, got {self.phi.shape}")
        if not np.all(np.isfinite(self.phi)):
            raise DomainError("phi must be finite")

    @property
    def r(self) -> np.ndarray:
        return np.exp(self.phi)

    @classmethod
    def from_radius(cls, grid: Grid, r) -> "RadialField":
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise DomainError("radius must be positive")
        return cls(grid, np.log(r))


def check_compatible(grid: Grid, params: FlowParams):
    if grid.kind != params.grid_kind:
        raise DomainError(
            f"n={params.n} needs a {params.grid_kind} grid, got {grid.kind}"
        )


def d1(field: RadialField) -> np.ndarray:
    """Centred first difference of phi."""
    p = _padded(field)
    return (p[2:] - p[:-2]) / (2 * field.grid.h)


def d2(field: RadialField) -> np.ndarray:
    """Centred second difference of phi."""
    p = _padded(field)
    return ((p[2:] - 2 * p[1:-1]) + p[:-2]) / field.grid.h ** 2


def _padded(field):
    phi = field.phi
    if field.grid.axisym:
        return np.concatenate(([phi[0]], phi, [phi[-1]]))
    return np.concatenate(([phi[-1]], phi, [phi[0]]))


@dataclass
class GeometryState:
    """Per-node geometry of the radial graph.

    ``kappa`` has shape (m, n) with the meridian curvature in column 0 and
    the rotational curvature repeated in the other columns.  ``sigmas``
    holds sigma_0..sigma_n per node.  F and Phi are NaN where sigma_k <= 0.
    """

    params: FlowParams
    grid: Grid
    phi: np.ndarray
    dphi: np.ndarray
    ddphi: np.ndarray
    r: np.ndarray
    rho: np.ndarray
    u: np.ndarray
    kappa: np.ndarray
    sigmas: np.ndarray
    sigma_k_mer_deleted: np.ndarray = field(repr=False)
    F: np.ndarray = field(repr=False)
    Phi: np.ndarray = field(repr=False)

    @property
    def sigma_k(self) -> np.ndarray:
        return self.sigmas[:, self.params.k]

    @property
    def cone_values(self) -> np.ndarray:
        """sigma_1..sigma_k per node, shape (m, k)."""
        return self.sigmas[:, 1:self.params.k + 1]


def geometry(field: RadialField, params: FlowParams) -> GeometryState:
    grid = field.grid
    check_compatible(grid, params)
    dphi, ddphi, rho, r, kappa, sigmas, sdel = _kernels.geometry_arrays(
        field.phi, grid.h, grid.cot, grid.axisym, params.n, params.k
    )
    sk = sigmas[:, params.k]
    with np.errstate(invalid="ignore"):
        F = np.where(sk > 0, np.abs(sk) ** (1.0 / params.beta), np.nan)
    Phi = r ** (params.alpha / params.beta) * F
    return GeometryState(
        params=params, grid=grid, phi=field.phi.copy(), dphi=dphi, ddphi=ddphi,
        r=r, rho=rho, u=r / rho, kappa=kappa, sigmas=sigmas,
        sigma_k_mer_deleted=sdel, F=F, Phi=Phi,
    )
