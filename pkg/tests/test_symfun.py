import itertools
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anisoflow import symfun
from anisoflow.errors import DomainError

SEED = 1234


def brute_sigma(m, kappa):
    return sum(np.prod(c) for c in itertools.combinations(kappa, m)) if m else 1.0


def fd4(f, s):
    """Fourth-order central first and second derivatives at 0."""
    fm2, fm1, f0, fp1, fp2 = (f(j * s) for j in (-2, -1, 0, 1, 2))
    return ((fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * s),
            (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * s * s))


def sym_matrix(rng, n):
    a = rng.normal(size=(n, n))
    return 0.5 * (a + a.T)


def sigma_of_matrix(k, A):
    """sigma_k of the eigenvalues of A, via the sum of principal k-minors."""
    n = A.shape[0]
    return sum(np.linalg.det(A[np.ix_(idx, idx)]) for idx in itertools.combinations(range(n), k))


kappas = st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=7)


# -- worked examples----------------------------------------------------------

def test_sigma_examples():
    assert symfun.sigma(0, [0.3, -2.0]) == 1.0
    assert symfun.sigma(2, [1, 1, 1]) == 3.0
    assert symfun.sigma(2, [1, 2, 3]) == 11.0
    assert symfun.sigma(4, [1, 2, 3]) == 0.0


def test_sigma_negative_order():
    with pytest.raises(DomainError):
        symfun.sigma(-1, [1.0])


def test_sigma_deleted_examples():
    assert symfun.sigma_deleted(1, [1, 2, 3], {2}) == 3.0
    assert symfun.sigma_deleted(2, [1, 2, 3], {0}) == 6.0
    assert symfun.sigma_deleted(2, [1, 2, 3], set()) == symfun.sigma(2, [1, 2, 3])


def test_sigma_deleted_bad_index():
    with pytest.raises(DomainError):
        symfun.sigma_deleted(1, [1, 2, 3], {3})
    with pytest.raises(DomainError):
        symfun.sigma_deleted(1, [1, 2, 3], [1, 1])


def test_gradient_examples():
    assert np.array_equal(symfun.sigma_gradient(1, [4.0, -1.0, 2.0]), [1, 1, 1])
    assert np.array_equal(symfun.sigma_gradient(2, [1, 2, 3]), [5, 4, 3])


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(SEED)
    for _ in range(50):
        n = int(rng.integers(1, 7))
        kap = rng.normal(size=n)
        m = int(rng.integers(1, n + 1))
        d = 1e-5
        fd = np.array([(symfun.sigma(m, kap + d * e) - symfun.sigma(m, kap - d * e)) / (2 * d)
                       for e in np.eye(n)])
        g = symfun.sigma_gradient(m, kap)
        assert np.allclose(g, fd, rtol=1e-8, atol=1e-8 * (1 + np.abs(g).max()))


def test_hessian_form_examples():
    assert symfun.sigma_hessian_form(2, [1, 1, 1], np.eye(3)) == 6.0
    assert symfun.sigma_hessian_form(3, [1, 2, 3], np.zeros((3, 3))) == 0.0
    assert symfun.sigma_hessian_form(1, [1, 2, 3], np.ones((3, 3))) == 0.0


def test_hessian_form_matches_finite_differences():
    rng = np.random.default_rng(SEED)
    for _ in range(100):
        n = int(rng.integers(2, 6))
        k = int(rng.integers(2, n + 1))
        kap = symfun.sample_cone(rng, n, k)
        eta = sym_matrix(rng, n)
        # sigma_k(diag(kappa) + s eta) has degree k <= 5 in s, so the stencil is exact
        f = lambda x: sigma_of_matrix(k, np.diag(kap) + x * eta)
        fd = fd4(f, 0.1)[1]
        q = symfun.sigma_hessian_form(k, kap, eta)
        assert abs(q - fd) <= 1e-6 * max(1.0, abs(q))


def test_cone_membership_examples():
    assert symfun.cone_membership([1, 1, 1], tol=0).max_k == 3
    cm = symfun.cone_membership([3, 1, -1], tol=0)
    assert cm.per_j_values[:2] == (3.0, -1.0)
    assert cm.max_k == 1
    assert symfun.cone_membership([0, 0, 0], tol=0).max_k == 0
    assert len(cm.per_j_values) == 3


def test_cone_default_tolerance_scales():
    # sigma_3 = 1e-13 sits inside the scale-aware tolerance band
    assert symfun.cone_membership([1e-13, 1, 1]).max_k == 2
    assert symfun.cone_membership([1e-13, 1, 1], tol=0).max_k == 3
    assert symfun.cone_membership([1, -1, 1e-14]).max_k == 0
    assert symfun.cone_membership([1, -1, 1e-14], tol=0).max_k == 1


# -- properties --------------------------------------------------------------

@settings(max_examples=200, deadline=None)
@given(kappas)
def test_recurrence_matches_brute_force(values):
    kap = np.array(values)
    e = symfun.sigma_all(kap)
    for m in range(len(kap) + 1):
        ref = brute_sigma(m, kap)
        assert abs(e[m] - ref) <= 1e-10 * (1 + np.abs(kap).max()) ** m * comb(len(kap), m)


@settings(max_examples=200, deadline=None)
@given(kappas, st.data())
def test_identity_one(values, data):
    kap = np.array(values)
    n = len(kap)
    i = data.draw(st.integers(0, n - 1))
    scale = (1 + np.abs(kap).max())
    for m in range(1, n + 1):
        lhs = symfun.sigma(m, kap)
        rhs = symfun.sigma_deleted(m, kap, {i}) + kap[i] * symfun.sigma_deleted(m - 1, kap, {i})
        assert abs(lhs - rhs) <= 1e-10 * scale ** m * comb(n, m)


@settings(max_examples=200, deadline=None)
@given(kappas)
def test_identity_four(values):
    kap = np.array(values)
    n = len(kap)
    e = symfun.sigma_all(kap)
    scale = (1 + np.abs(kap).max())
    for m in range(1, n + 1):
        lhs = symfun.sigma_gradient(m, kap) @ kap ** 2
        rhs = e[1] * e[m] - (m + 1) * (e[m + 1] if m < n else 0.0)
        assert abs(lhs - rhs) <= 1e-10 * scale ** (m + 1) * n * comb(n, m)


@settings(max_examples=100, deadline=None)
@given(kappas, st.sampled_from([2.0, 0.5]))
def test_homogeneity(values, lam):
    kap = np.array(values)
    for m in range(len(kap) + 1):
        a = symfun.sigma(m, lam * kap)
        b = lam ** m * symfun.sigma(m, kap)
        assert a == pytest.approx(b, rel=1e-12, abs=1e-12 * (1 + np.abs(kap).max()) ** m)


def test_newton_maclaurin_and_maclaurin_chain():
    rng = np.random.default_rng(SEED)
    for _ in range(300):
        n = int(rng.integers(2, 7))
        m = int(rng.integers(1, n + 1))
        kap = symfun.sample_cone(rng, n, m)
        if m >= 2:
            assert symfun.newton_maclaurin_gap(m, kap) >= -1e-12
        for l in range(1, m + 1):
            assert symfun.maclaurin_gap(m, l, kap) >= -1e-12


def test_newton_maclaurin_equality_on_umbilic_point():
    kap = np.full(4, 0.7)
    for m in range(2, 5):
        assert abs(symfun.newton_maclaurin_gap(m, kap)) < 1e-12


def test_property_five():
    rng = np.random.default_rng(SEED)
    for _ in range(300):
        n = int(rng.integers(1, 7))
        k = int(rng.integers(1, n + 1))
        kap = symfun.sample_cone(rng, n, k)
        lhs = kap[0] * symfun.sigma_deleted(k - 1, kap, {0})
        assert lhs >= k / n * symfun.sigma(k, kap) - 1e-12


def test_root_concavity():
    rng = np.random.default_rng(SEED)
    for _ in range(300):
        n = int(rng.integers(1, 7))
        m = int(rng.integers(1, n + 1))
        a, b = symfun.sample_cone(rng, n, m), symfun.sample_cone(rng, n, m)
        lam = rng.uniform()
        g = lambda v: symfun.sigma(m, v) ** (1 / m)
        assert g(lam * a + (1 - lam) * b) >= lam * g(a) + (1 - lam) * g(b) - 1e-12


def test_hessian_form_bound_holds_on_cone():
    rng = np.random.default_rng(SEED)
    for _ in range(300):
        k = int(rng.integers(2, 4))
        n = int(rng.integers(3, 6))
        kap = symfun.sample_cone(rng, n, k)
        eta = sym_matrix(rng, n)
        q = symfun.sigma_hessian_form(k, kap, eta)
        bound = symfun.hessian_form_bound(k, kap, eta)
        assert q <= bound + 1e-10 * (1 + abs(q) + abs(bound))


def test_hessian_form_bound_needs_k_two():
    with pytest.raises(DomainError):
        symfun.hessian_form_bound(1, [1.0, 2.0], np.eye(2))


def test_root_sigma_second_variation_matches_fd():
    rng = np.random.default_rng(SEED)
    for _ in range(50):
        n = int(rng.integers(2, 6))
        k = int(rng.integers(2, n + 1))
        kap = rng.uniform(0.2, 2.0, size=n)
        eta = sym_matrix(rng, n)
        G, dG, d2G = symfun.root_sigma_derivatives(k, kap, eta)
        f = lambda x: sigma_of_matrix(k, np.diag(kap) + x * eta) ** (1 / k)
        first, second = fd4(f, 1e-3)
        assert G == pytest.approx(f(0.0), rel=1e-12)
        assert dG == pytest.approx(first, rel=1e-7, abs=1e-9)
        assert d2G == pytest.approx(second, rel=1e-5, abs=1e-6)


def test_inverse_concavity_inequality():
    rng = np.random.default_rng(SEED)
    for _ in range(300):
        n = int(rng.integers(2, 6))
        k = int(rng.integers(2, 4))
        k = min(k, n)
        kap = rng.uniform(0.05, 3.0, size=n)
        eta = sym_matrix(rng, n)
        lhs, rhs = symfun.inverse_concavity_sides(k, kap, eta)
        assert lhs >= rhs - 1e-10 * (1 + abs(lhs) + abs(rhs))


def test_sample_cone_is_sorted_and_inside():
    rng = np.random.default_rng(SEED)
    for n in range(1, 6):
        for m in range(1, n + 1):
            kap = symfun.sample_cone(rng, n, m)
            assert np.all(np.diff(kap) <= 0)
            assert symfun.in_cone(kap, m)
