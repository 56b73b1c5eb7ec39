import math

import numpy as np
import pytest

from anisoflow import FlowParams, Grid, geometry
from anisoflow.errors import DomainError
from anisoflow.reference import (CounterexampleProfile, SphereSolution, counterexample_phi,
                                 elongated_initial, extinction_time, offset_sphere_initial,
                                 sphere_radius_exponential_form, sphere_initial, sphere_radius)
from anisoflow.symfun import cone_membership
from anisoflow.verification import sphere_ode_radius

SUPER = FlowParams(2, 1, 3.0, 1.0)
CRIT = FlowParams(2, 1, 2.0, 1.0)
SUB = FlowParams(2, 1, 1.5, 1.0)


@pytest.mark.parametrize("params", [SUPER, CRIT, SUB])
def test_unit_sphere_normalized_is_constant(params):
    s = SphereSolution(1.0, params)
    for t in (0.0, 0.5, 3.0):
        assert sphere_radius(t, s) == pytest.approx(1.0, rel=1e-15)


def test_critical_unnormalized_is_exponential():
    s = SphereSolution(2.5, CRIT)
    assert sphere_radius(0.7, s, "unnormalized") == pytest.approx(2.5 * math.exp(-CRIT.gamma * 0.7))
    assert sphere_radius(0.7, s) == 2.5


def test_super_limit_is_monotone_to_one():
    s = SphereSolution(2.0, SUPER)
    vals = [sphere_radius(t, s) for t in np.linspace(0, 20, 200)]
    # strictly decreasing until rounding pins it at 1
    assert np.all(np.diff(vals) <= 0)
    assert np.all(np.diff(vals[:50]) < 0)
    assert vals[-1] == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("params", [SUPER, FlowParams(2, 2, 5.0, 2.0), FlowParams(3, 2, 4.5, 0.8)])
@pytest.mark.parametrize("a0", [0.4, 2.0])
def test_bernoulli_form_equals_closed_form(params, a0):
    s = SphereSolution(a0, params)
    for t in np.linspace(0, 5, 11):
        assert sphere_radius(t, s) == pytest.approx(sphere_radius_exponential_form(t, s), rel=1e-13)


@pytest.mark.parametrize("params", [SUPER, CRIT, SUB, FlowParams(2, 2, 4.0, 2.0)])
@pytest.mark.parametrize("mode", ["normalized", "unnormalized"])
def test_closed_form_matches_ode(params, mode):
    s = SphereSolution(1.7, params)
    T = min(5.0, 0.9 * extinction_time(s, mode))
    ts = np.linspace(0, T, 21)
    closed = np.array([sphere_radius(t, s, mode) for t in ts])
    assert np.max(np.abs(closed - sphere_ode_radius(ts, s, mode)) / closed) < 1e-10


def test_extinction_time():
    s = SphereSolution(1.0, SUB)
    T = extinction_time(s, "unnormalized")
    q = SUB.qprime
    assert T == pytest.approx(1.0 / (-q * SUB.gamma))
    assert sphere_radius(0.999 * T, s, "unnormalized") < 0.01
    with pytest.raises(DomainError, match="extinction"):
        sphere_radius(1.01 * T, s, "unnormalized")
    assert extinction_time(SphereSolution(2.0, SUPER), "unnormalized") == math.inf
    assert extinction_time(SphereSolution(2.0, SUB), "normalized") == math.inf
    small = SphereSolution(0.5, SUB)
    Tn = extinction_time(small, "normalized")
    assert sphere_radius(0.999 * Tn, small) < 0.05


def test_sphere_solution_validation():
    with pytest.raises(DomainError):
        SphereSolution(0.0, SUPER)
    with pytest.raises(DomainError):
        sphere_radius(-1.0, SphereSolution(1.0, SUPER))
    with pytest.raises(DomainError):
        sphere_radius(1.0, SphereSolution(1.0, SUPER), "mixed")


# -- counterexample profile -------------------------------------------------

def test_profile_defaults_and_validation():
    p = CounterexampleProfile(1.5, 1.0, 1)
    assert p.q == pytest.approx(0.5)
    assert p.theta == pytest.approx(6.0)
    assert p.sigma == pytest.approx((0.5 * 6 - 1) / 6)
    with pytest.raises(DomainError):
        CounterexampleProfile(3.0, 1.0, 1)
    with pytest.raises(DomainError):
        CounterexampleProfile(1.5, 1.0, 1, theta=1.0)


def test_profile_values():
    p = CounterexampleProfile(1.5, 1.0, 1)
    t = -0.5
    assert counterexample_phi(0.0, t, p) == pytest.approx(-(0.5 ** p.theta))
    th, sg = p.theta, p.sigma
    x0 = 0.5 ** th
    both = -x0 + 0.5 ** (th * (1 + sg))
    inner = -x0 + 0.5 ** (-th + sg * th) * x0 ** 2
    assert inner == pytest.approx(both, rel=1e-12)
    assert counterexample_phi(x0, t, p) == pytest.approx(both, rel=1e-12)
    # direct substitution at (x, t) = (0.5, -0.5)
    want = -x0 - (1 - sg) / (1 + sg) * 0.5 ** (th * (1 + sg)) + 2 / (1 + sg) * 0.5 ** (1 + sg)
    assert counterexample_phi(0.5, -0.5, p) == pytest.approx(want, rel=1e-14)


@pytest.mark.parametrize("alpha, beta, k", [(1.5, 1.0, 1), (0.5, 2.0, 2), (2.0, 1.5, 3)])
def test_profile_is_c1_at_interface(alpha, beta, k):
    p = CounterexampleProfile(alpha, beta, k)
    t = -0.3
    x0 = abs(t) ** p.theta
    left = 2 * abs(t) ** (p.sigma * p.theta - p.theta) * x0
    right = 2 * x0 ** p.sigma
    assert left == pytest.approx(right, rel=1e-12)
    assert left == pytest.approx(2 * abs(t) ** (p.sigma * p.theta), rel=1e-12)
    d = 1e-7 * x0
    lo = (counterexample_phi(x0, t, p) - counterexample_phi(x0 - d, t, p)) / d
    hi = (counterexample_phi(x0 + d, t, p) - counterexample_phi(x0, t, p)) / d
    assert lo == pytest.approx(hi, rel=1e-4)


def test_profile_domain():
    p = CounterexampleProfile(1.5, 1.0, 1)
    with pytest.raises(DomainError):
        counterexample_phi(0.5, 0.0, p)
    with pytest.raises(DomainError):
        counterexample_phi(1.5, -0.5, p)


# -- initial data ------------------------------------------------------------

def test_elongated_initial():
    g = Grid("axisym-polar", 64)
    f = elongated_initial(g, 2.0)
    r = f.r
    th = g.nodes
    assert r[0] == pytest.approx(2.0 / math.sqrt(math.cos(th[0]) ** 2 + 4 * math.sin(th[0]) ** 2))
    assert np.max(r) == pytest.approx(2.0, rel=1e-3)
    assert np.min(r) == pytest.approx(1.0, rel=1e-3)
    near_one = elongated_initial(g, 1.0 + 1e-12)
    assert np.max(np.abs(near_one.phi)) < 1e-11
    with pytest.raises(DomainError):
        elongated_initial(g, 1.0)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_elongated_initial_is_convex(n):
    p = FlowParams(n, n, n + 2.0, 1.0)
    st = geometry(elongated_initial(Grid.for_params(p, 128), 3.0), p)
    assert all(cone_membership(kap).max_k == n for kap in st.kappa)


def test_offset_sphere_initial():
    g = Grid("axisym-polar", 128)
    f = offset_sphere_initial(g, 0.5)
    th = g.nodes
    x, z = f.r * np.sin(th), f.r * np.cos(th)
    assert np.allclose(x ** 2 + (z - 0.5) ** 2, 1.0)
    assert f.r.max() / f.r.min() == pytest.approx(3.0, rel=1e-3)
    p = FlowParams(2, 1, 1.0, 1.0)
    st = geometry(f, p)
    assert np.allclose(st.kappa, 1.0, atol=1e-3)
    with pytest.raises(DomainError):
        offset_sphere_initial(g, 1.0)


def test_sphere_initial():
    f = sphere_initial(Grid("periodic-circle", 16), 3.0)
    assert np.allclose(f.r, 3.0)
    with pytest.raises(DomainError):
        sphere_initial(Grid("periodic-circle", 16), -1.0)
