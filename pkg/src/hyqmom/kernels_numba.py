"""Numba-accelerated batch kernels (per-cell loops, implicit-QL eigenvalues).

Same contracts as :mod:`hyqmom.kernels_numpy`; this module is only imported
when numba is available and not disabled via ``HYQMOM_PURE_NUMPY``.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

TOL_BREAKDOWN = 1e-12
TOL_UNREAL = 1e-10

_EPS = 2.220446049250313e-16
_MAX_SWEEPS = 50
STATUS_NO_CONVERGENCE = -1000


@njit(cache=True)
def _tql(d, e, z, want_z):
    """Implicit-shift QL on a symmetric tridiagonal matrix (in place).

    ``d`` holds the diagonal and returns the (unordered) eigenvalues;
    ``e[:-1]`` holds the subdiagonal and is destroyed.  When ``want_z`` the
    vector ``z`` (init ``(1, 0, ..., 0)``) accumulates the first row of the
    eigenvector matrix.  Returns 0 on success, 1 if the sweep cap is hit.
    """
    m_size = d.shape[0]
    if m_size <= 1:
        return 0
    for l in range(m_size):
        iters = 0
        while True:
            mm = l
            while mm < m_size - 1:
                dd = abs(d[mm]) + abs(d[mm + 1])
                if abs(e[mm]) <= _EPS * dd:
                    break
                mm += 1
            if mm == l:
                break
            iters += 1
            if iters > _MAX_SWEEPS:
                return 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            sgn = r if g >= 0.0 else -r
            g = d[mm] - d[l] + e[l] / (g + sgn)
            s = 1.0
            c = 1.0
            p = 0.0
            underflow = False
            for i in range(mm - 1, l - 1, -1):
                f = s * e[i]
                h = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[mm] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * h
                p = s * r
                d[i + 1] = g + p
                g = c * r - h
                if want_z:
                    f = z[i + 1]
                    z[i + 1] = s * z[i] + c * f
                    z[i] = c * z[i] - s * f
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[mm] = 0.0
    return 0


@njit(cache=True)
def _sort_pairs(d, z):
    for i in range(1, d.shape[0]):
        key = d[i]
        kz = z[i]
        j = i - 1
        while j >= 0 and d[j] > key:
            d[j + 1] = d[j]
            z[j + 1] = z[j]
            j -= 1
        d[j + 1] = key
        z[j + 1] = kz


@njit(cache=True)
def _eigen_sorted(diag, off, want_z):
    m = diag.shape[0]
    d = diag.copy()
    e = np.zeros(m)
    for i in range(m - 1):
        e[i] = off[i]
    z = np.zeros(m)
    z[0] = 1.0
    st = _tql(d, e, z, want_z)
    _sort_pairs(d, z)
    return d, z, st


def tridiag_eigen(diag: np.ndarray, offdiag: np.ndarray, want_vectors: bool):
    d, z, st = _eigen_sorted(
        np.ascontiguousarray(diag, dtype=np.float64),
        np.ascontiguousarray(offdiag, dtype=np.float64),
        want_vectors,
    )
    if st != 0:
        from .errors import ConvergenceFailureError

        raise ConvergenceFailureError("implicit QL exceeded its sweep budget")
    return d, (z**2 if want_vectors else None)


@njit(cache=True)
def _closure_speeds_impl(states, n, qmom, tol_b, tol_u, top, lo, hi, status, sig, a, b, d, e):
    nc, width = states.shape
    n_mom = width - 1
    n_rows = n - 1 if qmom else n
    msize = n if qmom else n + 1
    odd_top = n_mom % 2 == 1
    for cell in range(nc):
        m0 = states[cell, 0]
        if m0 <= 0.0:
            status[cell] = -1
            top[cell] = 0.0
            lo[cell] = 0.0
            hi[cell] = 0.0
            continue
        for p in range(n_mom + 1):
            sig[1, p] = states[cell, p]
        sig[1, n_mom + 1] = 0.0
        a[0] = states[cell, 1] / m0
        b[0] = m0
        st = 0
        for k in range(1, n_rows + 1):
            for p in range(k, n_mom - k + 1):
                sig[k + 1, p] = sig[k, p + 1] - a[k - 1] * sig[k, p] - b[k - 1] * sig[k - 1, p]
            pivot = sig[k + 1, k]
            prev = sig[k, k - 1]
            # vanishing pivots are noise at the scale of the cancelled terms
            scale = (
                abs(sig[k, k + 1])
                + abs(a[k - 1] * sig[k, k])
                + abs(b[k - 1] * sig[k - 1, k])
            )
            if pivot < -tol_u * scale:
                st = -k
                break
            if (not qmom) and k == n_rows:
                if pivot < 0.0:
                    pivot = 0.0
                    sig[k + 1, k] = 0.0
            elif pivot <= tol_b * scale:
                st = k
                break
            b[k] = pivot / prev
            if k < n_rows or odd_top:
                denom = pivot if pivot != 0.0 else 1.0
                a[k] = sig[k + 1, k + 1] / denom - sig[k, k] / prev
        if st != 0:
            status[cell] = st
            top[cell] = 0.0
            lo[cell] = 0.0
            hi[cell] = 0.0
            continue
        if qmom:
            sig[n + 1, n] = 0.0
        else:
            acc = 0.0
            for k in range(n):
                acc += a[k]
            a[n] = acc / n
            sig[n + 1, n + 1] = sig[n + 1, n] * (a[n] + sig[n, n] / sig[n, n - 1])
        for k in range(n - 1, -1, -1):
            p = n_mom - k + 1
            sig[k + 1, p] = sig[k + 2, p - 1] + a[k] * sig[k + 1, p - 1] + b[k] * sig[k, p - 1]
        top[cell] = sig[1, n_mom + 1]

        for i in range(n):
            d[i] = a[i]
        for i in range(n - 1):
            e[i] = math.sqrt(b[i + 1])
        if not qmom:
            d[n] = a[n]
            beta = (2.0 * n + 1.0) / n * b[n]
            e[n - 1] = math.sqrt(beta) if beta > 0.0 else 0.0
        e[msize - 1] = 0.0
        ok = _tql(d[:msize], e[:msize], d[:1], False)
        if ok != 0:
            status[cell] = STATUS_NO_CONVERGENCE
            continue
        lmin = d[0]
        lmax = d[0]
        for i in range(1, msize):
            if d[i] < lmin:
                lmin = d[i]
            if d[i] > lmax:
                lmax = d[i]
        lo[cell] = lmin
        hi[cell] = lmax
    return 0


def closure_speeds_batch(
    states: np.ndarray,
    n: int,
    qmom: bool = False,
    tol_breakdown: float = TOL_BREAKDOWN,
    tol_unreal: float = TOL_UNREAL,
):
    states = np.ascontiguousarray(states, dtype=np.float64)
    nc, width = states.shape
    n_mom = width - 1
    expected = 2 * n if qmom else 2 * n + 1
    if width != expected:
        raise ValueError(f"state width {width} does not match n={n}, qmom={qmom}")
    top = np.empty(nc)
    lo = np.empty(nc)
    hi = np.empty(nc)
    status = np.zeros(nc, dtype=np.int64)
    sig = np.zeros((n + 2, n_mom + 2))
    a = np.zeros(n + 1)
    b = np.zeros(n + 1)
    msize = n if qmom else n + 1
    d = np.zeros(msize)
    e = np.zeros(msize)
    _closure_speeds_impl(
        states, n, qmom, tol_breakdown, tol_unreal, top, lo, hi, status, sig, a, b, d, e
    )
    return top, lo, hi, status


@njit(cache=True)
def _hll_update_impl(states, top, lam_min, lam_max, dtdx):
    nc, w = states.shape
    faces = np.empty((nc + 1, w))
    for f in range(nc + 1):
        il = f - 1 if f > 0 else 0
        ir = f if f < nc else nc - 1
        for j in range(w):
            flj = states[il, j + 1] if j < w - 1 else top[il]
            frj = states[ir, j + 1] if j < w - 1 else top[ir]
            if lam_min >= 0.0:
                faces[f, j] = flj
            elif lam_max <= 0.0:
                faces[f, j] = frj
            else:
                faces[f, j] = (
                    lam_max * flj
                    - lam_min * frj
                    + lam_min * lam_max * (states[ir, j] - states[il, j])
                ) / (lam_max - lam_min)
    out = np.empty_like(states)
    for i in range(nc):
        for j in range(w):
            out[i, j] = states[i, j] - dtdx * (faces[i + 1, j] - faces[i, j])
    return out


def hll_update(states, top, lam_min, lam_max, dt_over_dx):
    return _hll_update_impl(
        np.ascontiguousarray(states, dtype=np.float64),
        np.ascontiguousarray(top, dtype=np.float64),
        float(lam_min),
        float(lam_max),
        float(dt_over_dx),
    )
