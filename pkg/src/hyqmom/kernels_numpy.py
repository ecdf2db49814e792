"""Pure-numpy batch kernels: vectorized over cells, LAPACK for eigenvalues.

This is the fallback implementation behind :mod:`hyqmom.backend`; the numba
variant in :mod:`hyqmom.kernels_numba` computes the same quantities with
per-cell loops.  Status codes per cell: ``0`` strictly realizable (closure
and speeds valid), ``k > 0`` recurrence breakdown at rank ``k`` (caller must
reroute through the general closure), ``-k`` unrealizable at rank ``k``.
"""

from __future__ import annotations

import numpy as np

TOL_BREAKDOWN = 1e-12
TOL_UNREAL = 1e-10


def tridiag_eigen(diag: np.ndarray, offdiag: np.ndarray, want_vectors: bool):
    """Eigenvalues (ascending) of one symmetric tridiagonal matrix.

    Returns ``(values, squared first eigenvector components or None)``.
    """
    m = diag.size
    if m == 1:
        return diag.astype(float).copy(), np.ones(1)
    dense = np.diag(diag) + np.diag(offdiag, 1) + np.diag(offdiag, -1)
    if want_vectors:
        vals, vecs = np.linalg.eigh(dense)
        return vals, vecs[0, :] ** 2
    return np.linalg.eigvalsh(dense), None


def _nonzero(x: np.ndarray) -> np.ndarray:
    return np.where(x == 0.0, 1.0, x)


def closure_speeds_batch(
    states: np.ndarray,
    n: int,
    qmom: bool = False,
    tol_breakdown: float = TOL_BREAKDOWN,
    tol_unreal: float = TOL_UNREAL,
):
    """Per-cell flux closure and characteristic speed extremes.

    ``states`` has shape ``(cells, 2n + 1)`` (``(cells, 2n)`` for qmom).
    Returns ``(top, lo, hi, status)``: the closing moment, the smallest and
    largest characteristic speed, and the status code for every cell.
    Entries of flagged cells are zeroed and must be recomputed by the caller.
    """
    states = np.asarray(states, dtype=float)
    nc, width = states.shape
    n_mom = width - 1
    expected = 2 * n if qmom else 2 * n + 1
    if width != expected:
        raise ValueError(f"state width {width} does not match n={n}, qmom={qmom}")

    status = np.zeros(nc, dtype=np.int64)
    a = np.zeros((nc, n + 1))
    b = np.zeros((nc, n + 1))
    sig = np.zeros((nc, n + 2, n_mom + 2))
    sig[:, 1, : n_mom + 1] = states

    m0 = states[:, 0]
    status[m0 <= 0.0] = -1
    b[:, 0] = m0
    a[:, 0] = states[:, 1] / _nonzero(np.where(m0 > 0.0, m0, 0.0))

    n_rows = n - 1 if qmom else n  # highest sigma level carrying a pivot
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for k in range(1, n_rows + 1):
            lo_p, hi_p = k, n_mom - k
            sig[:, k + 1, lo_p : hi_p + 1] = (
                sig[:, k, lo_p + 1 : hi_p + 2]
                - a[:, k - 1, None] * sig[:, k, lo_p : hi_p + 1]
                - b[:, k - 1, None] * sig[:, k - 1, lo_p : hi_p + 1]
            )
            pivot = sig[:, k + 1, k].copy()
            # vanishing pivots are noise at the scale of the cancelled terms
            scale = (
                np.abs(sig[:, k, k + 1])
                + np.abs(a[:, k - 1] * sig[:, k, k])
                + np.abs(b[:, k - 1] * sig[:, k - 1, k])
            )
            fresh = status == 0
            unreal = fresh & (pivot < -tol_unreal * scale)
            status[unreal] = -k
            top_even_pivot = (not qmom) and k == n_rows
            if top_even_pivot:
                # rank-n pivot of the even-order system may vanish (boundary
                # closure); clip roundoff-negative values instead of flagging
                pivot = np.where(fresh & ~unreal, np.maximum(pivot, 0.0), pivot)
                sig[:, k + 1, k] = pivot
            else:
                broke = fresh & ~unreal & (pivot <= tol_breakdown * scale)
                status[broke] = k
            prev = _nonzero(sig[:, k, k - 1])
            b[:, k] = pivot / prev
            if (k < n_rows) or (n_mom % 2 == 1):
                a[:, k] = sig[:, k + 1, k + 1] / _nonzero(pivot) - sig[:, k, k] / prev

        if qmom:
            # boundary closure b_n = 0: zero top row, regenerate the next moment
            sig[:, n + 1, n] = 0.0
        else:
            # closure: a_n is the running mean of a_0..a_{n-1}
            a[:, n] = np.mean(a[:, :n], axis=1)
            sig[:, n + 1, n + 1] = sig[:, n + 1, n] * (
                a[:, n] + sig[:, n, n] / _nonzero(sig[:, n, n - 1])
            )
        for k in range(n - 1, -1, -1):
            p = n_mom - k + 1
            sig[:, k + 1, p] = (
                sig[:, k + 2, p - 1]
                + a[:, k] * sig[:, k + 1, p - 1]
                + b[:, k] * sig[:, k, p - 1]
            )
        top = sig[:, 1, n_mom + 1].copy()

        if qmom:
            diag = a[:, :n].copy()
            off = np.sqrt(np.maximum(b[:, 1:n], 0.0))
        else:
            beta = ((2.0 * n + 1.0) / n) * b[:, n]
            diag = np.concatenate((a[:, :n], a[:, n : n + 1]), axis=1)
            off = np.sqrt(
                np.maximum(np.concatenate((b[:, 1:n], beta[:, None]), axis=1), 0.0)
            )

    flagged = status != 0
    if np.any(flagged):
        top[flagged] = 0.0
        diag[flagged] = 0.0
        off[flagged] = 0.0
    lo, hi = _batched_extreme_eigs(diag, off)
    return top, lo, hi, status


def _batched_extreme_eigs(diag: np.ndarray, off: np.ndarray):
    nc, m = diag.shape
    if m == 1:
        return diag[:, 0].copy(), diag[:, 0].copy()
    dense = np.zeros((nc, m, m))
    idx = np.arange(m)
    dense[:, idx, idx] = diag
    dense[:, idx[:-1], idx[1:]] = off
    dense[:, idx[1:], idx[:-1]] = off
    vals = np.linalg.eigvalsh(dense)
    return vals[:, 0].copy(), vals[:, -1].copy()


def hll_update(
    states: np.ndarray,
    top: np.ndarray,
    lam_min: float,
    lam_max: float,
    dt_over_dx: float,
) -> np.ndarray:
    """One conservative HLL step with global wave speeds and zero-gradient ghosts."""
    flux = np.empty_like(states)
    flux[:, :-1] = states[:, 1:]
    flux[:, -1] = top

    ms = np.vstack((states[:1], states, states[-1:]))
    fs = np.vstack((flux[:1], flux, flux[-1:]))
    f_left, f_right = fs[:-1], fs[1:]
    if lam_min >= 0.0:
        f_face = f_left
    elif lam_max <= 0.0:
        f_face = f_right
    else:
        f_face = (
            lam_max * f_left
            - lam_min * f_right
            + (lam_min * lam_max) * (ms[1:] - ms[:-1])
        ) / (lam_max - lam_min)
    return states - dt_over_dx * (f_face[1:] - f_face[:-1])
