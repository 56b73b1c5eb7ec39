"""Independent oracles and the check table behind ``anisoflow verify``.

Fault injection: setting ANISOFLOW_INJECT_FAULT to a check name corrupts
that check's measured value, so the row must fail.  ANISOFLOW_SEED
overrides the sampling seed.
"""
from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np
from scipy.integrate import solve_ivp

from . import symfun
from .flow import StepperConfig, rescale_factor, run, tau
from .grid import Grid, RadialField, geometry
from .params import FlowParams
from .reference import SphereSolution, elongated_initial, sphere_initial, sphere_radius

DEFAULT_SEED = 20240611
FAULT_ENV = "ANISOFLOW_INJECT_FAULT"
SEED_ENV = "ANISOFLOW_SEED"


def seed_from_env(default: int = DEFAULT_SEED) -> int:
    raw = os.environ.get(SEED_ENV)
    return default if raw in (None, "") else int(raw)


# -- curvature oracles -------------------------------------------------------

def polar_curve_kappa(r, dr, ddr):
    """Curvature of the plane curve r(theta) in polar form."""
    r, dr, ddr = (np.asarray(a, dtype=float) for a in (r, dr, ddr))
    return (r * r + 2 * dr * dr - r * ddr) / (r * r + dr * dr) ** 1.5


def _fd(f: Callable, x: float, d: float):
    """Fourth-order central first and second derivatives of a vector function."""
    fm2, fm1, f0, fp1, fp2 = (np.asarray(f(x + j * d)) for j in (-2, -1, 0, 1, 2))
    first = (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * d)
    second = (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * d * d)
    return first, second


def embedding_curvatures(rfun: Callable[[float], float], theta, n: int, delta: float = 1e-3):
    """Principal curvatures of the radial graph r(theta), built as an embedded set.

    n = 1: the plane curve r(theta)(cos theta, sin theta).
    n >= 2: the surface of revolution r(theta)(sin theta cos psi,
    sin theta sin psi, cos theta); its rotational curvature equals that of
    the hypersurface of revolution in R^(n+1).  Fundamental forms come from
    finite differences of the embedding with the outward normal.
    Returns (kappa_mer, kappa_rot); kappa_rot is None for n = 1.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    kmer = np.empty_like(theta)
    krot = None if n == 1 else np.empty_like(theta)
    for i, th in enumerate(theta):
        if n == 1:
            X1, X2 = _fd(lambda s: rfun(s) * np.array([math.cos(s), math.sin(s)]), th, delta)
            nu = np.array([X1[1], -X1[0]]) / np.hypot(*X1)
            if nu @ (rfun(th) * np.array([math.cos(th), math.sin(th)])) < 0:
                nu = -nu
            kmer[i] = -(X2 @ nu) / (X1 @ X1)
            continue

        def surf(t, p):
            r = rfun(t)
            return r * np.array([math.sin(t) * math.cos(p), math.sin(t) * math.sin(p), math.cos(t)])

        Xt, Xtt = _fd(lambda s: surf(s, 0.0), th, delta)
        Xp, Xpp = _fd(lambda s: surf(th, s), 0.0, delta)
        nu = np.cross(Xt, Xp)
        nu /= np.linalg.norm(nu)
        if nu @ surf(th, 0.0) < 0:
            nu = -nu
        # meridians and parallels are curvature lines, so I and II are diagonal
        kmer[i] = -(Xtt @ nu) / (Xt @ Xt)
        krot[i] = -(Xpp @ nu) / (Xp @ Xp)
    return kmer, krot


def oracle_profile(theta):
    """Test profile r = 1 + 0.3 cos theta with its first two derivatives."""
    c, s = np.cos(theta), np.sin(theta)
    return 1 + 0.3 * c, -0.3 * s, -0.3 * c


def curvature_errors(ms=(64, 128, 256), n: int = 2, oracle: str = "embedding"):
    """Max-norm curvature error of the grid geometry against an oracle, per m.

    ``oracle`` is "embedding" (any n) or "polar" (n = 1 only).
    """
    params = FlowParams(n, 1, 3.0, 1.0)
    errors = []
    for m in ms:
        grid = Grid.for_params(params, m)
        th = grid.nodes
        r, dr, ddr = oracle_profile(th)
        state = geometry(RadialField.from_radius(grid, r), params)
        if oracle == "polar":
            if n != 1:
                raise ValueError("the polar-curve oracle needs n = 1")
            err = np.max(np.abs(state.kappa[:, 0] - polar_curve_kappa(r, dr, ddr)))
        elif oracle == "embedding":
            kmer, krot = embedding_curvatures(lambda t: 1 + 0.3 * math.cos(t), th, n)
            err = np.max(np.abs(state.kappa[:, 0] - kmer))
            if krot is not None:
                err = max(err, np.max(np.abs(state.kappa[:, 1:] - krot[:, None])))
        else:
            raise ValueError(f"unknown oracle {oracle!r}")
        errors.append(float(err))
    return errors


def observed_orders(ms, errors):
    return [math.log(errors[i] / errors[i + 1]) / math.log(ms[i + 1] / ms[i])
            for i in range(len(ms) - 1)]


# -- sphere and normalisation oracles ---------------------------------------

def sphere_ode_radius(t, s: SphereSolution, mode: str = "normalized", rtol: float = 1e-12):
    """High-accuracy numerical integration of the sphere radius ODE."""
    p = s.params
    expo = (p.alpha - p.k) / p.beta
    shift = 1.0 if mode == "normalized" else 0.0
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    sol = solve_ivp(lambda _, a: p.gamma * (shift * a - a ** expo), (0.0, float(ts.max())),
                    [s.a0], method="DOP853", t_eval=ts, rtol=rtol, atol=1e-14)
    return sol.y[0]


def sphere_run_error(params: FlowParams, a0: float, m: int, t_end: float,
                     record_every: int = 50) -> tuple:
    """Relative error of a simulated sphere against the closed form; (error, result)."""
    grid = Grid.for_params(params, m)
    cfg = StepperConfig(t_end=t_end, stop_on_converged=False,
                        record_every=record_every, snapshot_every=10 ** 9)
    res = run(sphere_initial(grid, a0), params, cfg, "normalized")
    sol = SphereSolution(a0, params)
    worst = 0.0
    for rec in res.records:
        a = sphere_radius(rec.t, sol, "normalized")
        worst = max(worst, abs(rec.r_min - a) / a, abs(rec.r_max - a) / a)
    return worst, res


def normalization_gap(params: FlowParams, initial: RadialField, t_end: float) -> float:
    """Max |r| gap between the normalised run and the mapped unnormalised run.

    The unnormalised trajectory is mapped by r -> r / rescale_factor(t) and
    t -> tau(t), then interpolated linearly in tau at the normalised
    snapshot times inside the common range.
    """
    cfg_u = StepperConfig(t_end=t_end, stop_on_converged=False, snapshot_every=1,
                          record_every=10 ** 9)
    un = run(initial, params, cfg_u, "unnormalized")
    if un.status != "t_end":
        raise RuntimeError(f"unnormalised run ended with {un.status} ({un.reason})")
    taus = np.array([tau(s.t, params) for s in un.snapshots])
    mapped = np.array([np.exp(s.phi) / rescale_factor(s.t, params) for s in un.snapshots])
    cfg_n = StepperConfig(t_end=float(taus[-1]), stop_on_converged=False, snapshot_every=1,
                          record_every=10 ** 9)
    no = run(initial, params, cfg_n, "normalized")
    worst = 0.0
    for snap in no.snapshots:
        if not taus[0] <= snap.t <= taus[-1]:
            continue
        j = int(np.clip(np.searchsorted(taus, snap.t), 1, len(taus) - 1))
        w = (snap.t - taus[j - 1]) / (taus[j] - taus[j - 1])
        ref = (1 - w) * mapped[j - 1] + w * mapped[j]
        worst = max(worst, float(np.max(np.abs(np.exp(snap.phi) - ref))))
    return worst


# -- the check table ---------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    limit: float
    kind: str  # "max" (value <= limit) or "min" (value >= limit)
    seconds: float = 0.0

    def line(self) -> str:
        op = "<=" if self.kind == "max" else ">="
        verdict = "PASS" if self.passed else "FAIL"
        return f"{verdict}  {self.name:<28} {self.value:12.4e} {op} {self.limit:.1e}  ({self.seconds:.2f}s)"


def _symmetric(rng, n):
    a = rng.normal(size=(n, n))
    return 0.5 * (a + a.T)


def _symfun_worst(rng, samples: int) -> dict:
    """Worst normalised violation per symfun inequality over random samples."""
    worst = {key: 0.0 for key in ("identity-1", "identity-4", "newton-maclaurin", "maclaurin",
                                  "concavity", "property-5", "hessian-bound", "inverse-concavity")}
    for _ in range(samples):
        n = int(rng.integers(2, 7))
        kap = rng.normal(size=n) * 2
        e = symfun.sigma_all(kap)
        scale = 1 + np.max(np.abs(kap))
        for m in range(1, n + 1):
            i = int(rng.integers(n))
            lhs = symfun.sigma(m, kap)
            rhs = symfun.sigma_deleted(m, kap, {i}) + kap[i] * symfun.sigma_deleted(m - 1, kap, {i})
            worst["identity-1"] = max(worst["identity-1"], abs(lhs - rhs) / scale ** m)
            lhs4 = float(symfun.sigma_gradient(m, kap) @ kap ** 2)
            rhs4 = e[1] * e[m] - (m + 1) * (e[m + 1] if m < n else 0.0)
            worst["identity-4"] = max(worst["identity-4"], abs(lhs4 - rhs4) / scale ** (m + 1))
        m = int(rng.integers(1, n + 1))
        kc = symfun.sample_cone(rng, n, m)
        if m >= 2:
            worst["newton-maclaurin"] = max(worst["newton-maclaurin"],
                                            -symfun.newton_maclaurin_gap(m, kc) - 1e-12)
        for l in range(1, m + 1):
            worst["maclaurin"] = max(worst["maclaurin"], -symfun.maclaurin_gap(m, l, kc) - 1e-12)
        mu = symfun.sample_cone(rng, n, m)
        lam = rng.uniform()
        g = lambda v: symfun.sigma(m, v) ** (1.0 / m)
        gap = g(lam * kc + (1 - lam) * mu) - lam * g(kc) - (1 - lam) * g(mu)
        worst["concavity"] = max(worst["concavity"], -gap - 1e-12)
        k = int(rng.integers(1, n + 1))
        kk = symfun.sample_cone(rng, n, k)
        lhs5 = kk[0] * symfun.sigma_deleted(k - 1, kk, {0})
        worst["property-5"] = max(worst["property-5"],
                                  (k / n * symfun.sigma(k, kk) - lhs5) / scale ** k - 1e-12)
        k = int(rng.integers(2, 4))
        n = int(rng.integers(3, 6))
        kk = symfun.sample_cone(rng, n, k)
        eta = _symmetric(rng, n)
        q = symfun.sigma_hessian_form(k, kk, eta)
        bound = symfun.hessian_form_bound(k, kk, eta)
        sc = (1 + abs(q) + abs(bound))
        worst["hessian-bound"] = max(worst["hessian-bound"], (q - bound) / sc - 1e-10)
        kp = rng.uniform(0.05, 3.0, size=n)
        lhs6, rhs6 = symfun.inverse_concavity_sides(k, kp, eta)
        sc = 1 + abs(lhs6) + abs(rhs6)
        worst["inverse-concavity"] = max(worst["inverse-concavity"], (rhs6 - lhs6) / sc - 1e-10)
    return worst


def run_checks(seed: Optional[int] = None, samples: int = 300, fault: Optional[str] = None,
               quick: bool = True) -> List[CheckResult]:
    """Evaluate every verification row; ``fault`` names a row to corrupt."""
    seed = seed_from_env() if seed is None else seed
    if fault is None:
        fault = os.environ.get(FAULT_ENV) or None
    rng = np.random.default_rng(seed)
    results: List[CheckResult] = []

    def add(name, value, limit, kind, t0):
        if name == fault:
            value = value + 1.0 if kind == "max" else value - 10.0
        ok = value <= limit if kind == "max" else value >= limit
        results.append(CheckResult(name, bool(ok), float(value), limit, kind,
                                   time.perf_counter() - t0))

    t0 = time.perf_counter()
    worst = _symfun_worst(rng, samples)
    for key, val in worst.items():
        add(f"symfun:{key}", max(val, 0.0), 1e-9 if key.startswith("identity") else 0.0, "max", t0)
        t0 = time.perf_counter()

    t0 = time.perf_counter()
    ms = (64, 128, 256)
    err = curvature_errors(ms, n=1, oracle="polar")
    add("geometry:polar-order", min(observed_orders(ms, err)), 1.9, "min", t0)
    t0 = time.perf_counter()
    err = curvature_errors(ms, n=2, oracle="embedding")
    add("geometry:embedding-order", min(observed_orders(ms, err)), 1.9, "min", t0)

    t0 = time.perf_counter()
    p = FlowParams(2, 1, 3.0, 1.0)
    s = SphereSolution(2.0, p)
    ts = np.linspace(0.0, 5.0, 51)
    ode = sphere_ode_radius(ts, s)
    closed = np.array([sphere_radius(t, s) for t in ts])
    add("reference:sphere-ode", float(np.max(np.abs(closed - ode) / ode)), 1e-10, "max", t0)

    t0 = time.perf_counter()
    m = 64 if quick else 256
    e, _ = sphere_run_error(p, 2.0, m, 1.0 if quick else 3.0)
    add("flow:sphere-closed-form", e, 1e-6, "max", t0)

    for label, params in (("super", p), ("critical", FlowParams(2, 1, 2.0, 1.0))):
        t0 = time.perf_counter()
        grid = Grid.for_params(params, m)
        gap = normalization_gap(params, elongated_initial(grid, 1.5), 0.2)
        add(f"flow:normalization-{label}", gap, 1e-5, "max", t0)
    return results


def check_names() -> List[str]:
    keys = ("identity-1", "identity-4", "newton-maclaurin", "maclaurin", "concavity",
            "property-5", "hessian-bound", "inverse-concavity")
    return ([f"symfun:{k}" for k in keys]
            + ["geometry:polar-order", "geometry:embedding-order", "reference:sphere-ode",
               "flow:sphere-closed-form", "flow:normalization-super",
               "flow:normalization-critical"])
