"""Compiled per-node kernels shared by geometry reconstruction and stepping.

Node i sees neighbours (i-1, i+1); on the periodic circle indices wrap,
on the polar grid the ghost values are even reflections (phi[-1] = phi[0],
phi[m] = phi[m-1]).  Nodes sit at cell centres, never on a pole, so
``cot`` is always finite.
"""
import math

import numpy as np
from numba import njit

# advance() status codes
RUNNING = 0
T_END = 1
CONVERGED = 2
CONE = 3
NONFINITE = 4
UNSTABLE = 5
ESCAPE = 6


@njit(cache=True, inline="always")
def _neighbours(phi, i, axisym):
    m = phi.shape[0]
    if axisym:
        lo = phi[i - 1] if i > 0 else phi[0]
        hi = phi[i + 1] if i < m - 1 else phi[m - 1]
    else:
        lo = phi[(i - 1) % m]
        hi = phi[(i + 1) % m]
    return lo, hi


@njit(cache=True, inline="always")
def _node_geometry(lo, mid, hi, h, cot_i, axisym, n, e, kappa):
    """Fill ``kappa`` (mer first) and ``e`` = [sigma_0..sigma_n]; return (d1, d2, rho, r)."""
    d1 = (hi - lo) / (2.0 * h)
    d2 = ((hi - 2.0 * mid) + lo) / (h * h)
    rho = math.sqrt(1.0 + d1 * d1)
    r = math.exp(mid)
    kappa[0] = (1.0 - d2 / (rho * rho)) / (r * rho)
    if axisym:
        krot = (1.0 - d1 * cot_i) / (r * rho)
        for j in range(1, n):
            kappa[j] = krot
    e[0] = 1.0
    for j in range(1, n + 1):
        e[j] = 0.0
    for i in range(n):
        x = kappa[i]
        for j in range(i + 1, 0, -1):
            e[j] += x * e[j - 1]
    return d1, d2, rho, r


@njit(cache=True, inline="always")
def _sigma_without_first(kappa, order, n, f):
    """sigma_order of kappa[1:], i.e. sigma_order(kappa|mer); ``f`` is scratch."""
    if order == 0:
        return 1.0
    f[0] = 1.0
    for j in range(1, order + 1):
        f[j] = 0.0
    for i in range(1, n):
        x = kappa[i]
        top = min(i, order)
        for j in range(top, 0, -1):
            f[j] += x * f[j - 1]
    return f[order]


@njit(cache=True)
def geometry_arrays(phi, h, cot, axisym, n, k):
    m = phi.shape[0]
    d1 = np.empty(m)
    d2 = np.empty(m)
    rho = np.empty(m)
    r = np.empty(m)
    kap = np.empty((m, n))
    sig = np.empty((m, n + 1))
    sdel = np.empty(m)
    e = np.empty(n + 1)
    f = np.empty(n + 1)
    kappa = np.empty(n)
    for i in range(m):
        lo, hi = _neighbours(phi, i, axisym)
        a, b, c, d = _node_geometry(lo, phi[i], hi, h, cot[i], axisym, n, e, kappa)
        d1[i] = a
        d2[i] = b
        rho[i] = c
        r[i] = d
        for j in range(n):
            kap[i, j] = kappa[j]
        for j in range(n + 1):
            sig[i, j] = e[j]
        sdel[i] = _sigma_without_first(kappa, k - 1, n, f)
    return d1, d2, rho, r, kap, sig, sdel


@njit(cache=True)
def evaluate(phi, h, cot, axisym, n, k, alpha, beta, shift, cone_tol, out, diff):
    """RHS of the scalar flow for phi = log r, plus diffusivity per node.

    ``shift`` is gamma for the normalised flow and 0 otherwise.  Returns
    the first node whose sigma_1..sigma_k fall to ``cone_tol`` or below,
    or -1 when every node is inside the cone.

    With kappa = (km, kr, ..., kr) (kr repeated n - 1 times) the symmetric
    functions are sigma_j = C(n-1, j) kr^j + km C(n-1, j-1) kr^(j-1) and
    sigma_{k-1}(kappa|mer) = C(n-1, k-1) kr^(k-1).
    """
    m = phi.shape[0]
    binom = np.zeros(n + 1)
    binom[0] = 1.0
    for j in range(1, n):
        binom[j] = binom[j - 1] * (n - j) / j
    ab = alpha / beta - 1.0
    ib = 1.0 / beta
    bad = -1
    for i in range(m):
        lo, hi = _neighbours(phi, i, axisym)
        mid = phi[i]
        d1 = (hi - lo) / (2.0 * h)
        d2 = ((hi - 2.0 * mid) + lo) / (h * h)
        rho2 = 1.0 + d1 * d1
        rho = math.sqrt(rho2)
        r = math.exp(mid)
        rr = 1.0 / (r * rho)
        km = (1.0 - d2 / rho2) * rr
        kr = (1.0 - d1 * cot[i]) * rr if axisym else 0.0
        pw = 1.0
        sk = 1.0
        sd = 1.0
        for j in range(1, k + 1):
            sd = binom[j - 1] * pw
            sk = km * sd + binom[j] * pw * kr
            if not sk > cone_tol:
                if bad < 0:
                    bad = i
            pw *= kr
        if sk > 0.0:
            w = math.exp(ab * mid) * rho
            # a single pow per node; sk**(ib - 1) = F / sk
            F = sk if ib == 1.0 else sk ** ib
            out[i] = shift - w * F
            diff[i] = w * ib * (F / sk) * sd / (r * rho2 * rho)
        else:
            out[i] = np.nan
            diff[i] = np.nan
    return bad


@njit(cache=True)
def advance(phi, t, nmax, t_end, cfl, rk4, h, cot, axisym, n, k, alpha, beta,
            shift, cone_tol, conv_tol, conv_need, conv_count, r_floor, r_cap):
    """Take up to ``nmax`` explicit steps in place.

    Returns (steps, t, code, conv_count, node).  On CONE / NONFINITE /
    UNSTABLE the field is left at the last accepted state.
    """
    m = phi.shape[0]
    k1 = np.empty(m)
    k2 = np.empty(m)
    k3 = np.empty(m)
    k4 = np.empty(m)
    tmp = np.empty(m)
    diff = np.empty(m)
    steps = 0
    code = RUNNING
    node = -1
    while steps < nmax:
        if t >= t_end:
            code = T_END
            break
        bad = evaluate(phi, h, cot, axisym, n, k, alpha, beta, shift, cone_tol, k1, diff)
        if bad >= 0:
            code = CONE
            node = bad
            break
        dmax = 0.0
        for i in range(m):
            if not math.isfinite(diff[i]):
                dmax = -1.0
                node = i
                break
            if diff[i] > dmax:
                dmax = diff[i]
        if not dmax > 0.0:
            code = UNSTABLE
            break
        dt = cfl * h * h / dmax
        clipped = False
        if t + dt >= t_end:
            dt = t_end - t
            clipped = True
        if rk4:
            for i in range(m):
                tmp[i] = phi[i] + 0.5 * dt * k1[i]
            bad = evaluate(tmp, h, cot, axisym, n, k, alpha, beta, shift, cone_tol, k2, diff)
            if bad < 0:
                for i in range(m):
                    tmp[i] = phi[i] + 0.5 * dt * k2[i]
                bad = evaluate(tmp, h, cot, axisym, n, k, alpha, beta, shift, cone_tol, k3, diff)
            if bad < 0:
                for i in range(m):
                    tmp[i] = phi[i] + dt * k3[i]
                bad = evaluate(tmp, h, cot, axisym, n, k, alpha, beta, shift, cone_tol, k4, diff)
            if bad >= 0:
                code = CONE
                node = bad
                break
            for i in range(m):
                tmp[i] = phi[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        else:
            for i in range(m):
                tmp[i] = phi[i] + dt * k1[i]
        for i in range(m):
            if not math.isfinite(tmp[i]):
                node = i
                code = NONFINITE
                break
        if code != RUNNING:
            break
        lo = tmp[0]
        hi = tmp[0]
        for i in range(m):
            phi[i] = tmp[i]
            if tmp[i] < lo:
                lo = tmp[i]
            if tmp[i] > hi:
                hi = tmp[i]
        t = t_end if clipped else t + dt
        steps += 1
        rmin = math.exp(lo)
        rmax = math.exp(hi)
        if rmin < r_floor or rmax > r_cap:
            code = ESCAPE
            break
        if conv_tol > 0.0:
            dev = (rmax - rmin) / (0.5 * (rmax + rmin))
            if dev < conv_tol:
                conv_count += 1
            else:
                conv_count = 0
            if conv_count >= conv_need:
                code = CONVERGED
                break
        if t >= t_end:
            code = T_END
            break
    return steps, t, code, conv_count, node
