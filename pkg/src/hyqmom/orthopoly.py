"""Three-term recurrence machinery for moment-induced orthogonal polynomials.

The moment-to-coefficient transform (``chebyshev``) and its inverse
(``reverse_chebyshev``) move between a moment vector and the recurrence
coefficients ``(a_k, b_k)`` of the monic orthogonal polynomials
``Q_{k+1} = (X - a_k) Q_k - b_k Q_{k-1}``.  Roots and Gauss quadratures are
obtained through symmetric tridiagonal Jacobi matrices, never from monomial
coefficients (which are badly conditioned at high order).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import (
    BoundaryBreakdownError,
    InsufficientOrderError,
    InvalidCoefficientsError,
    NegativeOffdiagonalError,
)

# Pivot below this relative size signals a boundary moment vector.
BREAKDOWN_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class RecurrenceCoefficients:
    """Recurrence coefficients ``a_0..a_p`` and ``b_0..b_q``.

    ``b_0`` equals the zeroth moment of the generating vector (1 in the
    standardized scale).  The raw and standardized scales are related by
    ``a_raw = mean + sqrt(var) * a_std`` and ``b_raw = var * b_std`` for
    ``k >= 1``; the mean, variance and density are recoverable as
    ``a_raw[0]``, ``b_raw[1]`` and ``b_raw[0]``.
    """

    a: np.ndarray
    b: np.ndarray


def coefficients_to_standardized(rc: RecurrenceCoefficients) -> RecurrenceCoefficients:
    """Rescale raw-moment coefficients to the standardized (mean 0, var 1) scale."""
    mean = float(rc.a[0])
    var = float(rc.b[1])
    if var <= 0.0:
        raise InvalidCoefficientsError("variance b_1 must be > 0 to standardize")
    a = (rc.a - mean) / np.sqrt(var)
    b = rc.b / var
    b = b.copy()
    b[0] = 1.0
    return RecurrenceCoefficients(a, b)


def coefficients_to_raw(
    rc: RecurrenceCoefficients, m0: float, mean: float, variance: float
) -> RecurrenceCoefficients:
    """Rescale standardized coefficients to the raw scale of ``(m0, mean, variance)``."""
    a = mean + np.sqrt(variance) * rc.a
    b = variance * rc.b
    b[0] = m0
    return RecurrenceCoefficients(a, b)


def chebyshev(moments: np.ndarray, tol_rel: float = BREAKDOWN_TOL) -> RecurrenceCoefficients:
    """Recurrence coefficients from moments ``(M_0, ..., M_N)``.

    Runs the sigma-table recursion
    ``sigma_{k,p} = sigma_{k-1,p+1} - a_{k-1} sigma_{k-1,p} - b_{k-1} sigma_{k-2,p}``
    and returns ``a_0..a_{(N-1)//2}``, ``b_0..b_{N//2}``.  Raises
    :class:`BoundaryBreakdownError` with the failing rank when a pivot
    ``sigma_{k,k}`` falls below ``tol_rel`` times its row magnitude (the
    vector is on or near the boundary of moment space).
    """
    m = np.asarray(moments, dtype=float)
    n_mom = m.size - 1
    if n_mom < 0 or m[0] <= 0.0:
        raise BoundaryBreakdownError(0, "M_0 must be > 0")
    n = n_mom // 2
    na = (n_mom - 1) // 2 + 1 if n_mom >= 1 else 0
    a = np.zeros(max(na, 0))
    b = np.zeros(n + 1)
    b[0] = m[0]
    if n_mom >= 1:
        a[0] = m[1] / m[0]
    sig = np.zeros((n + 2, n_mom + 1))
    sig[1, :] = m
    for k in range(1, n + 1):
        lo, hi = k, n_mom - k
        sig[k + 1, lo : hi + 1] = (
            sig[k, lo + 1 : hi + 2]
            - a[k - 1] * sig[k, lo : hi + 1]
            - b[k - 1] * sig[k - 1, lo : hi + 1]
        )
        pivot = sig[k + 1, k]
        # a vanishing pivot is noise at the scale of the terms that cancelled
        scale = (
            abs(sig[k, k + 1])
            + abs(a[k - 1] * sig[k, k])
            + abs(b[k - 1] * sig[k - 1, k])
        )
        if pivot <= tol_rel * scale:
            raise BoundaryBreakdownError(k)
        b[k] = pivot / sig[k, k - 1]
        if k < na:
            a[k] = sig[k + 1, k + 1] / pivot - sig[k, k] / sig[k, k - 1]
    return RecurrenceCoefficients(a, b)


def reverse_chebyshev(rc: RecurrenceCoefficients, up_to_order: int) -> np.ndarray:
    """Moments ``(M_0, ..., M_m)`` regenerated from recurrence coefficients.

    Exact inverse of :func:`chebyshev`.  Producing ``M_m`` requires
    ``a_k`` for ``k <= (m-1)//2`` and ``b_k`` for ``k <= m//2``.  Interior
    ``b_k`` must be positive; only the last supplied ``b`` may vanish
    (boundary closure).
    """
    a = np.asarray(rc.a, dtype=float)
    b = np.asarray(rc.b, dtype=float)
    m_top = int(up_to_order)
    if m_top < 0:
        raise ValueError("up_to_order must be >= 0")
    need_a = (m_top - 1) // 2 if m_top >= 1 else -1
    need_b = m_top // 2
    if a.size <= need_a or b.size <= need_b:
        raise InsufficientOrderError(
            f"moments to order {m_top} need a_0..a_{need_a} and b_0..b_{need_b}"
        )
    if b[0] <= 0.0:
        raise InvalidCoefficientsError("b_0 must be > 0")
    if np.any(b[1 : need_b + 1] < 0.0):
        raise InvalidCoefficientsError("b_k must be >= 0")
    if need_b >= 2 and np.any(b[1:need_b] == 0.0):
        raise InvalidCoefficientsError("interior b_k must be > 0")

    nz = need_b
    z = np.zeros((nz + 2, m_top + 1))  # z[k+1, p] holds Z_{k,p}
    z[1, 0] = b[0]
    if m_top >= 1:
        z[1, 1] = b[0] * a[0]
    for k in range(1, nz + 1):
        z[k + 1, 0] = b[k] * z[k, 0]
        if 2 * k + 1 <= m_top:
            z[k + 1, 1] = z[k + 1, 0] * (a[k] + z[k, 1] / z[k, 0])
    for p in range(1, m_top):
        kmax = (m_top - p - 1) // 2
        for k in range(0, kmax + 1):
            z[k + 1, p + 1] = z[k + 2, p - 1] + a[k] * z[k + 1, p] + b[k] * z[k, p + 1]
    return z[1, : m_top + 1].copy()


def build_q_polynomials(rc: RecurrenceCoefficients, n: int | None = None) -> list[np.ndarray]:
    """Monic polynomials ``Q_0..Q_n`` as ascending coefficient arrays.

    ``Q_{k+1} = (X - a_k) Q_k - b_k Q_{k-1}`` with ``Q_{-1} = 0``,
    ``Q_0 = 1``.  Coefficient form is kept for reporting and functional
    evaluation only; roots always go through Jacobi matrices.
    """
    if n is None:
        n = min(rc.a.size, rc.b.size)
    if n > rc.a.size or (n >= 2 and rc.b.size < n):
        raise InsufficientOrderError(f"Q_{n} needs a_0..a_{n - 1} and b_1..b_{n - 1}")
    polys = [np.array([1.0])]
    prev = np.zeros(0)
    for k in range(n):
        q = polys[-1]
        nxt = np.zeros(q.size + 1)
        nxt[1:] += q
        nxt[: q.size] -= rc.a[k] * q
        if k >= 1:
            nxt[: prev.size] -= rc.b[k] * prev
        prev = q
        polys.append(nxt)
    return polys


@dataclass(frozen=True, eq=False)
class JacobiMatrix:
    """Symmetric tridiagonal matrix with off-diagonal ``sqrt(b_k)``."""

    diag: np.ndarray
    offdiag: np.ndarray

    def dense(self) -> np.ndarray:
        m = np.diag(self.diag)
        if self.offdiag.size:
            m += np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)
        return m


def jacobi_matrix(
    rc: RecurrenceCoefficients,
    size: int,
    terminal: tuple[float, float] | None = None,
) -> JacobiMatrix:
    """Jacobi matrix of the recurrence, optionally with a modified last row.

    Without ``terminal`` the result is the ``size x size`` matrix whose
    eigenvalues are the roots of ``Q_size``.  With ``terminal = (alpha, beta)``
    the last diagonal entry is ``alpha`` and the last off-diagonal
    ``sqrt(beta)``, giving the companion of the closing polynomial.
    """
    if size < 1:
        raise ValueError("size must be >= 1")
    if terminal is None:
        diag = np.array(rc.a[:size], dtype=float)
        bvals = np.array(rc.b[1:size], dtype=float)
    else:
        alpha, beta = terminal
        diag = np.concatenate((rc.a[: size - 1], [alpha])).astype(float)
        bvals = np.concatenate((rc.b[1 : size - 1], [beta])).astype(float)
    if diag.size != size or bvals.size != size - 1:
        raise InsufficientOrderError("not enough recurrence coefficients for requested size")
    if np.any(bvals < 0.0):
        raise NegativeOffdiagonalError("b_k must be >= 0 inside a Jacobi matrix")
    return JacobiMatrix(diag, np.sqrt(bvals))


def tridiagonal_eigen(
    jm: JacobiMatrix, with_vectors: bool = False
) -> tuple[np.ndarray, np.ndarray | None]:
    """Eigenvalues (ascending) of a Jacobi matrix.

    With ``with_vectors`` also returns the squared first components of the
    unit eigenvectors, which carry the Gauss quadrature weights.
    """
    vals, first_sq = backend.tridiag_eigen(
        np.asarray(jm.diag, dtype=float),
        np.asarray(jm.offdiag, dtype=float),
        with_vectors,
    )
    return vals, (first_sq if with_vectors else None)


@dataclass(frozen=True, eq=False)
class Quadrature:
    """Gauss quadrature: strictly increasing abscissas, positive weights."""

    abscissas: np.ndarray
    weights: np.ndarray

    def power_sum(self, k: int) -> float:
        return float(np.sum(self.weights * self.abscissas**k))


def gauss_quadrature(rc: RecurrenceCoefficients, k: int) -> Quadrature:
    """k-point Gauss quadrature reproducing the moments up to order ``2k - 1``.

    Abscissas are the eigenvalues of the k-th Jacobi matrix; weights come
    from the squared first eigenvector components scaled by ``b_0``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if rc.b[0] <= 0.0:
        raise InvalidCoefficientsError("b_0 must be > 0")
    if np.any(rc.b[1:k] <= 0.0):
        raise InvalidCoefficientsError("b_1..b_{k-1} must be > 0 for a k-point rule")
    jm = jacobi_matrix(rc, k)
    vals, first_sq = tridiagonal_eigen(jm, with_vectors=True)
    return Quadrature(vals, rc.b[0] * first_sq)


def polynomial_eval(coeffs: np.ndarray, x: np.ndarray | float):
    """Evaluate an ascending-coefficient polynomial (Horner)."""
    acc = np.zeros_like(np.asarray(x, dtype=float))
    for c in np.asarray(coeffs)[::-1]:
        acc = acc * x + c
    return acc


def polynomial_multiply(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    return np.convolve(p, q)


def polynomial_derivative(p: np.ndarray) -> np.ndarray:
    if p.size <= 1:
        return np.zeros(1)
    return p[1:] * np.arange(1, p.size)
