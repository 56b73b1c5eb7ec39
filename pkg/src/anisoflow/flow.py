"""Time stepping for the scalar radial-graph flow and its normalisation maps."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import _kernels
from .diagnostics import DiagnosticsRecord, record
from .errors import ConeViolation, DomainError, NonFinite, StabilityError
from .grid import RadialField, check_compatible, geometry
from .params import FlowParams

MODES = ("normalized", "unnormalized")
SCHEMES = ("rk4", "euler")


@dataclass(frozen=True)
class StepperConfig:
    cfl: float = 0.2
    t_end: float = 1.0
    max_steps: int = 10_000_000
    snapshot_every: int = 1000
    record_every: int = 10
    cone_tol: float = 0.0
    scheme: str = "rk4"
    converge_tol: float = 1e-6
    converge_steps: int = 50
    stop_on_converged: bool = True
    r_floor: float = 1e-8
    r_cap: float = 1e8

    def __post_init__(self):
        if not 0 < self.cfl <= 1:
            raise DomainError(f"cfl must lie in (0, 1], got {self.cfl}")
        if not self.t_end > 0:
            raise DomainError(f"t_end must be positive, got {self.t_end}")
        if self.scheme not in SCHEMES:
            raise DomainError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        for name in ("max_steps", "snapshot_every", "record_every", "converge_steps"):
            if getattr(self, name) < 1:
                raise DomainError(f"{name} must be >= 1")
        if self.cone_tol < 0:
            raise DomainError("cone_tol must be non-negative")


def _check_mode(mode):
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}, got {mode!r}")


def _evaluate(field: RadialField, params: FlowParams, shift: float, cone_tol: float):
    grid = field.grid
    check_compatible(grid, params)
    out = np.empty(grid.m)
    diff = np.empty(grid.m)
    bad = _kernels.evaluate(field.phi, grid.h, grid.cot, grid.axisym, params.n, params.k,
                            params.alpha, params.beta, shift, cone_tol, out, diff)
    if bad >= 0:
        state = geometry(field, params)
        raise ConeViolation(bad, state.sigmas[bad, 1:])
    return out, diff


def rhs_normalized(field: RadialField, params: FlowParams, cone_tol: float = 0.0) -> np.ndarray:
    """d(phi)/dt for the normalised flow: gamma - exp((alpha/beta - 1) phi) rho F."""
    return _evaluate(field, params, params.gamma, cone_tol)[0]


def rhs_unnormalized(field: RadialField, params: FlowParams, cone_tol: float = 0.0) -> np.ndarray:
    return _evaluate(field, params, 0.0, cone_tol)[0]


def diffusivity(field: RadialField, params: FlowParams, cone_tol: float = 0.0) -> np.ndarray:
    """Linearised coefficient of phi'' in the RHS, per node.

    Chain rule through kappa_mer = (1 - phi''/rho^2) / (r rho):
    D = exp((alpha/beta - 1) phi) rho (1/beta) sigma_k^(1/beta - 1)
        sigma_{k-1}(kappa|mer) / (r rho^3).
    """
    return _evaluate(field, params, 0.0, cone_tol)[1]


def stable_dt(field: RadialField, params: FlowParams, cfg: StepperConfig) -> float:
    D = diffusivity(field, params, cfg.cone_tol)
    dmax = float(np.max(D))
    if not dmax > 0 or not np.all(np.isfinite(D)):
        raise StabilityError(f"maximum diffusivity is {dmax}; the flow is not parabolic")
    return cfg.cfl * field.grid.h ** 2 / dmax


# -- normalisation maps ------------------------------------------------------

def rescale_factor(t: float, params: FlowParams) -> float:
    """Scale phi(t) with X_normalised = X / phi(t)."""
    if t < 0:
        raise DomainError("t must be non-negative")
    g = params.gamma
    if params.regime == "critical":
        return math.exp(-g * t)
    base = 1.0 + params.excess * g / params.beta * t
    if base <= 0:
        raise DomainError(
            f"t={t} is past the singular time {params.beta / (-params.excess * g):.6g}"
        )
    return base ** (params.beta / (params.k + params.beta - params.alpha))


def tau(t: float, params: FlowParams) -> float:
    """Normalised-flow time corresponding to unnormalised time t."""
    if t < 0:
        raise DomainError("t must be non-negative")
    if params.regime == "critical":
        return float(t)
    b, e, g = params.beta, params.excess, params.gamma
    arg = b + e * g * t
    if arg <= 0:
        raise DomainError(f"log argument {arg} is not positive at t={t}")
    return (b * math.log(arg) - b * math.log(b)) / (e * g)


# -- stepping ----------------------------------------------------------------

def _shift(params, mode):
    _check_mode(mode)
    return params.gamma if mode == "normalized" else 0.0


def _advance(phi, t, nmax, t_end, params, cfg, grid, shift, conv_tol, conv_count):
    return _kernels.advance(
        phi, t, nmax, t_end, cfg.cfl, cfg.scheme == "rk4", grid.h, grid.cot, grid.axisym,
        params.n, params.k, params.alpha, params.beta, shift, cfg.cone_tol,
        conv_tol, cfg.converge_steps, conv_count, cfg.r_floor, cfg.r_cap,
    )


def step(field: RadialField, params: FlowParams, cfg: StepperConfig,
         mode: str = "normalized", t: float = 0.0):
    """One explicit step of size ``stable_dt``; returns (new field, record)."""
    check_compatible(field.grid, params)
    shift = _shift(params, mode)
    phi = field.phi.copy()
    steps, t_new, code, _, node = _advance(phi, t, 1, math.inf, params, cfg, field.grid,
                                           shift, -1.0, 0)
    _raise_for(code, node, field, params, t)
    new = RadialField(field.grid, phi)
    return new, record(geometry(new, params), t_new)


def _raise_for(code, node, field, params, t):
    if code == _kernels.CONE:
        state = geometry(field, params)
        raise ConeViolation(node, state.sigmas[node, 1:], t)
    if code == _kernels.NONFINITE:
        raise NonFinite(node, t)
    if code == _kernels.UNSTABLE:
        raise StabilityError("maximum diffusivity is not positive")


@dataclass
class Snapshot:
    t: float
    step: int
    phi: np.ndarray


@dataclass
class RunResult:
    status: str
    reason: str
    params: FlowParams
    mode: str
    steps: int
    t: float
    records: List[DiagnosticsRecord] = field(default_factory=list)
    snapshots: List[Snapshot] = field(default_factory=list)
    final: Optional[RadialField] = None

    @property
    def final_record(self) -> DiagnosticsRecord:
        return self.records[-1]

    def times(self) -> np.ndarray:
        return np.array([rec.t for rec in self.records])

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(rec, name) for rec in self.records])


_STATUS = {
    _kernels.T_END: ("t_end", ""),
    _kernels.CONVERGED: ("converged", ""),
    _kernels.CONE: ("blowup", "cone"),
    _kernels.NONFINITE: ("blowup", "nonfinite"),
    _kernels.ESCAPE: ("blowup", "radius-escape"),
    _kernels.UNSTABLE: ("invalid", "unstable"),
}


def run(initial: RadialField, params: FlowParams, cfg: StepperConfig,
        mode: str = "normalized") -> RunResult:
    """Evolve until t_end, max_steps, convergence to a round sphere, or breakdown.

    Convergence (sphere deviation below ``cfg.converge_tol`` for
    ``cfg.converge_steps`` consecutive steps) is only tested outside the
    sub-critical regime, where the unit sphere is not an attractor.
    """
    grid = initial.grid
    check_compatible(grid, params)
    shift = _shift(params, mode)
    phi = initial.phi.copy()
    t = 0.0
    steps = 0
    result = RunResult("running", "", params, mode, 0, 0.0)
    result.records.append(record(geometry(initial, params), 0.0))
    result.snapshots.append(Snapshot(0.0, 0, phi.copy()))
    conv_tol = cfg.converge_tol if (cfg.stop_on_converged and params.regime != "sub") else -1.0
    conv_count = 0
    while True:
        budget = cfg.max_steps - steps
        if budget <= 0:
            result.status, result.reason = "max_steps", ""
            break
        chunk = min(budget, cfg.record_every - steps % cfg.record_every,
                    cfg.snapshot_every - steps % cfg.snapshot_every)
        done, t, code, conv_count, node = _advance(phi, t, chunk, cfg.t_end, params, cfg,
                                                    grid, shift, conv_tol, conv_count)
        steps += done
        current = RadialField(grid, phi)
        finished = code != _kernels.RUNNING
        if (done and steps % cfg.record_every == 0) or (finished and result.records[-1].t != t):
            result.records.append(record(geometry(current, params), t))
        if (done and steps % cfg.snapshot_every == 0) or (finished and result.snapshots[-1].t != t):
            result.snapshots.append(Snapshot(t, steps, phi.copy()))
        if finished:
            result.status, result.reason = _STATUS[code]
            if code == _kernels.CONE and steps == 0:
                result.status = "invalid"
            break
    result.steps = steps
    result.t = t
    result.final = RadialField(grid, phi)
    return result
