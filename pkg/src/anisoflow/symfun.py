"""Elementary symmetric polynomials of principal curvatures.

Indices are 0-based throughout: ``kappa[0]`` is kappa_1 in 1-based notation,
and ``sigma_deleted(m, kappa, {0})`` is sigma_m(kappa|1).
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import DomainError


def as_kappa(values) -> np.ndarray:
    kappa = np.asarray(values, dtype=float)
    if kappa.ndim != 1 or kappa.size < 1:
        raise DomainError("kappa must be a non-empty 1-d vector")
    if not np.all(np.isfinite(kappa)):
        raise DomainError("kappa must be finite")
    return kappa


def sigma_all(kappa) -> np.ndarray:
    """Return ``[sigma_0, ..., sigma_n]`` by the one-entry-at-a-time recurrence."""
    kappa = as_kappa(kappa)
    n = kappa.size
    e = np.zeros(n + 1)
    e[0] = 1.0
    for i, x in enumerate(kappa):
        # descending j so e[j-1] still holds the previous prefix
        for j in range(i + 1, 0, -1):
            e[j] += x * e[j - 1]
    return e


def sigma(m: int, kappa) -> float:
    if m < 0:
        raise DomainError(f"order must be non-negative, got {m}")
    e = sigma_all(kappa)
    if m >= e.size:
        return 0.0
    return float(e[m])


def sigma_deleted(m: int, kappa, excluded=()) -> float:
    """sigma_m of kappa with the entries at ``excluded`` set to zero."""
    kappa = as_kappa(kappa)
    excluded = list(excluded)
    if len(set(excluded)) != len(excluded):
        raise DomainError(f"excluded indices must be distinct: {excluded}")
    for i in excluded:
        if not 0 <= i < kappa.size:
            raise DomainError(f"index {i} out of range for n={kappa.size}")
    reduced = kappa.copy()
    reduced[excluded] = 0.0
    return sigma(m, reduced)


def sigma_gradient(m: int, kappa) -> np.ndarray:
    kappa = as_kappa(kappa)
    if not 1 <= m <= kappa.size:
        raise DomainError(f"order must lie in [1, {kappa.size}], got {m}")
    return np.array([sigma_deleted(m - 1, kappa, (i,)) for i in range(kappa.size)])


def sigma_hessian_form(k: int, kappa, eta) -> float:
    """Second derivative of sigma_k at ``diag(kappa)`` in direction ``eta``.

    Returns d^2/ds^2 sigma_k(diag(kappa) + s*eta) at s = 0, which equals

        sum_{p != q} sigma_{k-2}(kappa|pq) * (eta[p,p]*eta[q,q] - eta[p,q]*eta[q,p]).

    The diagonal block contributes sigma_{k-2}(kappa|pq) to the coefficient
    of eta_pp*eta_qq (zero when p == q) and the off-diagonal block
    contributes -sigma_{k-2}(kappa|pq) to eta_pq*eta_qp.
    """
    kappa = as_kappa(kappa)
    eta = np.asarray(eta, dtype=float)
    n = kappa.size
    if eta.shape != (n, n):
        raise DomainError(f"eta must be {n}x{n}, got {eta.shape}")
    if k < 2:
        return 0.0
    total = 0.0
    for p in range(n):
        for q in range(n):
            if p == q:
                continue
            c = sigma_deleted(k - 2, kappa, (p, q))
            total += c * (eta[p, p] * eta[q, q] - eta[p, q] * eta[q, p])
    return float(total)


@dataclass(frozen=True)
class ConeMembership:
    max_k: int
    per_j_values: tuple


def default_cone_tol(kappa, j: int) -> float:
    return 1e-12 * (1.0 + float(np.max(np.abs(kappa)))) ** j


def cone_membership(kappa, tol=None) -> ConeMembership:
    """Largest m such that sigma_1, ..., sigma_m all exceed the tolerance.

    With ``tol=None`` a scale-aware tolerance ``1e-12 * (1 + |kappa|_inf)**j``
    is used for sigma_j; an explicit ``tol`` applies to every order.
    """
    kappa = as_kappa(kappa)
    if tol is not None and tol < 0:
        raise DomainError("tol must be non-negative")
    e = sigma_all(kappa)
    values = tuple(float(v) for v in e[1:])
    max_k = 0
    for j, v in enumerate(values, start=1):
        t = default_cone_tol(kappa, j) if tol is None else tol
        if v > t:
            max_k = j
        else:
            break
    return ConeMembership(max_k, values)


def in_cone(kappa, m: int, tol=None) -> bool:
    return cone_membership(kappa, tol).max_k >= m


# -- inequality toolkit ------------------------------------------------------

def newton_maclaurin_gap(m: int, kappa) -> float:
    """RHS minus LHS of sigma_m sigma_{m-2} <= c sigma_{m-1}^2 (>= 0 on the cone)."""
    n = len(kappa)
    c = (m - 1) * (n - m + 1) / (m * (n - m + 2))
    e = sigma_all(kappa)
    return float(c * e[m - 1] ** 2 - e[m] * e[m - 2])


def maclaurin_gap(m: int, l: int, kappa) -> float:
    """(sigma_l/C_n^l)^(1/l) - (sigma_m/C_n^m)^(1/m) for 1 <= l <= m."""
    n = len(kappa)
    e = sigma_all(kappa)
    return float((e[l] / comb(n, l)) ** (1.0 / l) - (e[m] / comb(n, m)) ** (1.0 / m))


def hessian_form_bound(k: int, kappa, eta) -> float:
    """Upper bound for ``sigma_hessian_form`` valid on Gamma_k^+, k >= 2.

    Uses the first variations d sigma_k = sum_p sigma_{k-1}(kappa|p) eta_pp
    and dH = trace(eta).
    """
    kappa = as_kappa(kappa)
    eta = np.asarray(eta, dtype=float)
    if k < 2:
        raise DomainError("bound needs k >= 2")
    sk = sigma(k, kappa)
    H = sigma(1, kappa)
    a = float(sigma_gradient(k, kappa) @ np.diag(eta)) / sk
    b = float(np.trace(eta)) / H
    return -sk * (a - b) * ((2 - k) / (k - 1) * a - k / (k - 1) * b)


def root_sigma_derivatives(k: int, kappa, eta):
    """G = sigma_k^(1/k) at ``diag(kappa)``: value, first and second variation."""
    kappa = as_kappa(kappa)
    eta = np.asarray(eta, dtype=float)
    sk = sigma(k, kappa)
    ds = float(sigma_gradient(k, kappa) @ np.diag(eta))
    d2s = sigma_hessian_form(k, kappa, eta)
    p = 1.0 / k
    G = sk ** p
    dG = p * sk ** (p - 1) * ds
    d2G = p * sk ** (p - 1) * d2s + p * (p - 1) * sk ** (p - 2) * ds ** 2
    return G, dG, d2G


def inverse_concavity_sides(k: int, kappa, eta):
    """Both sides of the inverse-concavity inequality for G = sigma_k^(1/k).

    Returns ``(lhs, rhs)`` with
    lhs = G''(eta, eta) + 2 sum_{p,q} dG/dh_pp * eta_pq * eta_qp / kappa_q
    rhs = 2 (dG(eta))^2 / G,
    where lhs >= rhs for every positive ``kappa``.
    """
    kappa = as_kappa(kappa)
    eta = np.asarray(eta, dtype=float)
    G, dG, d2G = root_sigma_derivatives(k, kappa, eta)
    sk = sigma(k, kappa)
    gdot = (1.0 / k) * sk ** (1.0 / k - 1) * sigma_gradient(k, kappa)
    cross = float(np.sum(gdot[:, None] * eta * eta.T / kappa[None, :]))
    return d2G + 2.0 * cross, 2.0 * dG ** 2 / G


def sample_cone(rng: np.random.Generator, n: int, m: int, max_tries: int = 10000) -> np.ndarray:
    """Random kappa in Gamma_m^+, sorted non-increasing.

    Positive sorted entries get a controlled number of sign flips on the
    smallest ones; candidates outside the cone are rejected.
    """
    for _ in range(max_tries):
        kappa = np.sort(rng.uniform(0.05, 3.0, size=n))[::-1]
        flips = int(rng.integers(0, n - m + 1))
        if flips:
            kappa[n - flips:] *= -rng.uniform(0.0, 1.0, size=flips)
        kappa = np.sort(kappa)[::-1]
        if cone_membership(kappa).max_k >= m:
            return kappa
    raise RuntimeError(f"no sample found in Gamma_{m}^+ for n={n}")
