"""Exact sphere solutions, the self-similar counterexample profile, initial data."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .grid import Grid, RadialField
from .params import FlowParams


@dataclass(frozen=True)
class SphereSolution:
    a0: float
    params: FlowParams

    def __post_init__(self):
        if not self.a0 > 0:
            raise DomainError(f"initial radius must be positive, got {self.a0}")


def extinction_time(s: SphereSolution, mode: str = "unnormalized") -> float:
    """Time at which the sphere radius reaches 0 (inf if it never does).

    Only the sub-critical regime collapses in finite time: unnormalised
    spheres always, normalised ones when a0 < 1.
    """
    p = s.params
    q = p.qprime
    g = p.gamma
    if p.regime != "sub":
        return math.inf
    if mode == "unnormalized":
        return s.a0 ** (-q) / (-q * g)
    w0 = s.a0 ** (-q)
    if w0 >= 1:
        return math.inf
    return math.log(1.0 / (1.0 - w0)) / (-q * g)


def sphere_radius(t: float, s: SphereSolution, mode: str = "normalized") -> float:
    """Radius at time t of the centred sphere solution starting from a0.

    Normalised: da/dt = gamma (a - a**((alpha-k)/beta)), solved through
    w = a**(-q') with q' = (alpha-k-beta)/beta, giving
    a = (1 + (a0**(-q') - 1) exp(-q' gamma t))**(-1/q').
    Unnormalised: da/dt = -gamma a**((alpha-k)/beta), giving
    a = (a0**(-q') + q' gamma t)**(-1/q'), or a0 exp(-gamma t) if q' = 0.
    """
    if t < 0:
        raise DomainError("t must be non-negative")
    p = s.params
    q, g, a0 = p.qprime, p.gamma, s.a0
    if mode == "normalized":
        if q == 0:
            return a0
        w = 1.0 + (a0 ** (-q) - 1.0) * math.exp(-q * g * t)
    elif mode == "unnormalized":
        if q == 0:
            return a0 * math.exp(-g * t)
        w = a0 ** (-q) + q * g * t
    else:
        raise DomainError(f"unknown mode {mode!r}")
    if w <= 0:
        raise DomainError(
            f"t={t} is past the extinction time {extinction_time(s, mode):.6g}"
        )
    return w ** (-1.0 / q)


def sphere_radius_exponential_form(t: float, s: SphereSolution) -> float:
    """Normalised sphere radius written as exp(q' g t)/(exp(q' g t) - (a0^q' - 1)/a0^q')."""
    q, g = s.params.qprime, s.params.gamma
    e = math.exp(q * g * t)
    aq = s.a0 ** q
    return (e / (e - (aq - 1.0) / aq)) ** (1.0 / q)


@dataclass(frozen=True)
class CounterexampleProfile:
    """Self-similar barrier profile for alpha < beta + k.

    q = beta + k - alpha, exponent sigma = (q*theta - beta)/(k*theta);
    theta must satisfy q*theta > max(1, beta).  The default
    theta = (2 + beta)/q is a choice of this package.
    """

    alpha: float
    beta: float
    k: int
    theta: float = None

    def __post_init__(self):
        q = self.q
        if not q > 0:
            raise DomainError(f"profile needs alpha < beta + k (q = {q})")
        if self.theta is None:
            object.__setattr__(self, "theta", (2.0 + self.beta) / q)
        if not q * self.theta > max(1.0, self.beta):
            raise DomainError(
                f"theta={self.theta} must satisfy q*theta > max(1, beta)"
            )

    @property
    def q(self) -> float:
        return self.beta + self.k - self.alpha

    @property
    def sigma(self) -> float:
        return (self.q * self.theta - self.beta) / (self.k * self.theta)


def counterexample_phi(x: float, t: float, p: CounterexampleProfile) -> float:
    if not -1 <= t < 0:
        raise DomainError(f"t must lie in [-1, 0), got {t}")
    if not 0 <= x <= 1:
        raise DomainError(f"x must lie in [0, 1], got {x}")
    at = abs(t)
    th, sg = p.theta, p.sigma
    inner = at ** th
    if x < inner:
        return -inner + at ** (-th + sg * th) * x * x
    return (-inner - (1 - sg) / (1 + sg) * at ** (th * (1 + sg))
            + 2.0 / (1 + sg) * x ** (1 + sg))


# -- initial data ------------------------------------------------------------

def sphere_initial(grid: Grid, a0: float = 1.0) -> RadialField:
    if not a0 > 0:
        raise DomainError("radius must be positive")
    return RadialField(grid, np.full(grid.m, math.log(a0)))


def elongated_initial(grid: Grid, aspect: float) -> RadialField:
    """Prolate ellipsoid (ellipse for n = 1) with semi-axes 1 and ``aspect``.

    The long axis points along theta = 0, so r(0) = aspect and r(pi/2) = 1.
    """
    if not aspect > 1:
        raise DomainError(f"aspect must exceed 1, got {aspect}")
    th = grid.nodes
    b = float(aspect)
    phi = -0.5 * np.log(np.cos(th) ** 2 / b ** 2 + np.sin(th) ** 2)
    return RadialField(grid, phi)


def offset_sphere_initial(grid: Grid, offset: float, radius: float = 1.0) -> RadialField:
    """Sphere of the given radius whose centre sits ``offset`` along the axis.

    Ratio of radii (radius + offset)/(radius - offset); star-shaped for
    0 <= offset < radius.
    """
    if not 0 <= offset < radius:
        raise DomainError(f"offset must lie in [0, radius), got {offset}")
    th = grid.nodes
    c = offset / radius
    r = radius * (c * np.cos(th) + np.sqrt(1.0 - (c * np.sin(th)) ** 2))
    return RadialField(grid, np.log(r))


def mode_decay_rate(params: FlowParams, l: int) -> float:
    """Decay rate of degree-l perturbations of the unit sphere, normalised flow.

    Linearising phi = eps * Y_l gives d(eps)/dt = -rate * eps with
    rate = gamma ((alpha - beta - k)/beta + k l (l + n - 1) / (n beta)).
    A negative rate means growth.  The l = 1 rate is gamma (alpha - beta)/beta,
    so near-round bodies lose roundness only for alpha < beta.
    """
    if l < 0:
        raise DomainError("degree must be non-negative")
    p = params
    return p.gamma * (p.excess / p.beta + p.k * l * (l + p.n - 1) / (p.n * p.beta))
