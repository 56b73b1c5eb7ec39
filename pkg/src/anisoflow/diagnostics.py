"""Scalar observables of a flow snapshot and checks on their time series."""
from __future__ import annotations

import math
from dataclasses import astuple, dataclass, fields
from typing import Callable, Iterable, List, Sequence

import numpy as np

COLUMNS = (
    "t", "r_min", "r_max", "R", "grad_norm", "u_min", "F_min", "F_max",
    "Phi_min", "Phi_max", "kappa_min", "kappa_max", "cone_margin", "sphere_dev",
)


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    r_min: float
    r_max: float
    R: float
    grad_norm: float
    u_min: float
    F_min: float
    F_max: float
    Phi_min: float
    Phi_max: float
    kappa_min: float
    kappa_max: float
    cone_margin: float
    sphere_dev: float

    def as_row(self) -> tuple:
        return astuple(self)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def record(state, t: float) -> DiagnosticsRecord:
    """Reduce a GeometryState to its extrema.

    grad_norm is max |D phi|, which equals max |Dr|/r.
    """
    r_min = float(np.min(state.r))
    r_max = float(np.max(state.r))
    return DiagnosticsRecord(
        t=float(t),
        r_min=r_min,
        r_max=r_max,
        R=r_max / r_min,
        grad_norm=float(np.max(np.abs(state.dphi))),
        u_min=float(np.min(state.u)),
        F_min=float(np.min(state.F)),
        F_max=float(np.max(state.F)),
        Phi_min=float(np.min(state.Phi)),
        Phi_max=float(np.max(state.Phi)),
        kappa_min=float(np.min(state.kappa)),
        kappa_max=float(np.max(state.kappa)),
        cone_margin=float(np.min(state.cone_values)),
        sphere_dev=(r_max - r_min) / (0.5 * (r_max + r_min)),
    )


@dataclass(frozen=True)
class DecayFit:
    rate: float
    amplitude: float
    residual: float
    flag: str = "ok"


def fit_decay(series: Sequence, tail_fraction: float = 0.5, floor: float = 1e-14) -> DecayFit:
    """Least-squares fit of log(grad_norm) = log C - a t over the series tail.

    ``series`` holds (t, grad_norm) pairs.  Values at or below ``floor``
    are dropped; if none survive the fit returns rate = inf with flag
    "below-floor".
    """
    data = np.asarray(series, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValueError("series must be a sequence of (t, value) pairs")
    if not 0 < tail_fraction <= 1:
        raise ValueError("tail_fraction must lie in (0, 1]")
    start = int(math.floor(len(data) * (1 - tail_fraction)))
    tail = data[start:]
    keep = tail[:, 1] > floor
    if not np.any(keep):
        return DecayFit(math.inf, 0.0, 0.0, "below-floor")
    tail = tail[keep]
    if len(tail) < 10:
        raise ValueError(f"need at least 10 tail points above the floor, got {len(tail)}")
    t, y = tail[:, 0], np.log(tail[:, 1])
    slope, intercept = np.polyfit(t, y, 1)
    resid = y - (slope * t + intercept)
    return DecayFit(-float(slope), float(math.exp(intercept)),
                    float(math.sqrt(np.mean(resid ** 2))))


@dataclass(frozen=True)
class SandwichReport:
    lower_ok: tuple
    upper_ok: tuple
    worst_violation: float

    @property
    def passed(self) -> bool:
        return all(self.lower_ok) and all(self.upper_ok)


def sandwich_check(records: Iterable, lower: Callable[[float], float],
                   upper: Callable[[float], float], eps: float) -> SandwichReport:
    """Check lower(t) - eps <= r_min and r_max <= upper(t) + eps at every record.

    worst_violation is the largest amount by which either bound is
    exceeded beyond eps (0 when all pass).
    """
    lo_ok, hi_ok = [], []
    worst = 0.0
    for rec in records:
        lo_gap = lower(rec.t) - eps - rec.r_min
        hi_gap = rec.r_max - upper(rec.t) - eps
        lo_ok.append(bool(lo_gap <= 0))
        hi_ok.append(bool(hi_gap <= 0))
        worst = max(worst, lo_gap, hi_gap)
    return SandwichReport(tuple(lo_ok), tuple(hi_ok), float(worst))


def c0_bounds(params, r_min0: float, r_max0: float):
    """Constant radial bounds from the maximum principle for alpha >= beta + k."""
    if params.regime == "critical":
        return r_min0, r_max0
    if params.regime == "super":
        return min(r_min0, 1.0), max(r_max0, 1.0)
    raise ValueError("no C^0 bound in the sub-critical regime")


def gradient_monotone_violation(records: Sequence, eps: float) -> float:
    """Largest rise of grad_norm above its running minimum beyond eps (0 if none)."""
    running = math.inf
    worst = 0.0
    for rec in records:
        running = min(running, rec.grad_norm)
        worst = max(worst, rec.grad_norm - running - eps)
    return worst


def monotone_tail(values: Sequence[float], eps: float = 0.0) -> bool:
    """True when the sequence never rises by more than eps between entries."""
    v = np.asarray(values, dtype=float)
    return bool(np.all(np.diff(v) <= eps))


def series_columns(records: List[DiagnosticsRecord]) -> dict:
    return {name: np.array([getattr(r, name) for r in records]) for name in COLUMNS}
