"""Moment representations and realizability.

Raw moments are plain 1-D float arrays ``(M_0, ..., M_N)``.  The standardized
form splits off the affine content (density, mean, variance) and keeps the
shape of the velocity distribution in the standardized moments
``S_k = C_k / C_2^{k/2}``, which are invariant under translation and scaling
of the velocity axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from math import comb

import numpy as np

from .errors import (
    DegreeTooHighError,
    InsufficientOrderError,
    NonPositiveDensityError,
)

# C_2 below this (relative to M_2/M_0) is treated as a Dirac measure.
DEGENERATE_VARIANCE_REL = 1e-14

# Default relative tolerance for Hankel pivot sign tests.
DEFAULT_REALIZABILITY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class StandardizedState:
    """Density, mean, variance and standardized moments ``(S_3, ..., S_N)``.

    ``s`` is empty when the variance is degenerate (Dirac measure): all
    higher central moments are then null.
    """

    m0: float
    mean: float
    variance: float
    s: np.ndarray
    degenerate: bool = False

    @property
    def order(self) -> int:
        return 2 + len(self.s)

    def standardized_moments(self) -> np.ndarray:
        """Return ``(S_0, S_1, S_2, S_3, ..., S_N) = (1, 0, 1, ...)``."""
        return np.concatenate(([1.0, 0.0, 1.0], self.s))


class Realizability(Enum):
    STRICT_INTERIOR = "strict-interior"
    BOUNDARY = "boundary"
    UNREALIZABLE = "unrealizable"


@dataclass(frozen=True, eq=False)
class RealizabilityReport:
    classification: Realizability
    rank: int | None
    hankel: np.ndarray

    @property
    def is_interior(self) -> bool:
        return self.classification is Realizability.STRICT_INTERIOR


def raw_to_standardized(moments: np.ndarray) -> StandardizedState:
    """Convert raw moments to the standardized representation.

    Central moments come from the binomial shift
    ``C_k = sum_i C(k,i) (-u)^{k-i} M_i / M_0`` and are then scaled by
    ``C_2^{k/2}``.  Raises :class:`NonPositiveDensityError` for ``M_0 <= 0``.
    A variance at or below ``DEGENERATE_VARIANCE_REL * max(1, M_2/M_0)`` marks
    the state as degenerate (Dirac) with empty ``s``.
    """
    m = np.asarray(moments, dtype=float)
    if m.ndim != 1 or m.size < 1:
        raise InsufficientOrderError("need at least the zeroth moment")
    if not np.all(np.isfinite(m)):
        raise ValueError("moments must be finite")
    m0 = float(m[0])
    if m0 <= 0.0:
        raise NonPositiveDensityError(f"M_0 = {m0} must be > 0")
    order = m.size - 1
    if order == 0:
        return StandardizedState(m0, 0.0, 0.0, np.empty(0), degenerate=True)
    mean = float(m[1]) / m0
    if order == 1:
        return StandardizedState(m0, mean, 0.0, np.empty(0), degenerate=True)

    central = _central_from_raw(m, m0, mean)
    c2 = float(central[2])
    if c2 <= DEGENERATE_VARIANCE_REL * max(1.0, float(m[2]) / m0):
        return StandardizedState(m0, mean, max(c2, 0.0), np.empty(0), degenerate=True)
    root = np.sqrt(c2)
    s = central[3:] / root ** np.arange(3, order + 1)
    return StandardizedState(m0, mean, c2, s)


def standardized_to_raw(state: StandardizedState, order: int | None = None) -> np.ndarray:
    """Exact inverse of :func:`raw_to_standardized`.

    ``order`` defaults to the order stored in ``state``; for degenerate
    states it must be given explicitly (the result is the Dirac sequence
    ``M_k = M_0 mean^k``).
    """
    if order is None:
        order = state.order
    if state.m0 <= 0.0:
        raise NonPositiveDensityError("state density must be > 0")
    if state.degenerate or state.variance == 0.0:
        return state.m0 * state.mean ** np.arange(order + 1, dtype=float)
    if order > state.order:
        raise InsufficientOrderError(
            f"state holds moments up to order {state.order}, requested {order}"
        )
    root = np.sqrt(state.variance)
    central = np.concatenate(
        ([1.0, 0.0, state.variance], state.s * root ** np.arange(3, state.order + 1))
    )
    return _raw_from_central(central[: order + 1], state.m0, state.mean)


def _central_from_raw(m: np.ndarray, m0: float, mean: float) -> np.ndarray:
    order = m.size - 1
    scaled = m / m0
    central = np.empty(order + 1)
    central[0] = 1.0
    if order >= 1:
        central[1] = 0.0
    for k in range(2, order + 1):
        acc = 0.0
        for i in range(k + 1):
            acc += comb(k, i) * (-mean) ** (k - i) * scaled[i]
        central[k] = acc
    return central


def _raw_from_central(central: np.ndarray, m0: float, mean: float) -> np.ndarray:
    order = central.size - 1
    raw = np.empty(order + 1)
    raw[0] = m0
    if order >= 1:
        raw[1] = m0 * mean
    for k in range(2, order + 1):
        acc = mean**k
        for i in range(2, k + 1):
            acc += comb(k, i) * mean ** (k - i) * central[i]
        raw[k] = m0 * acc
    return raw


def hankel_matrix(smoments: np.ndarray) -> np.ndarray:
    """Full Hankel matrix ``A[i, j] = S_{i+j}`` of the standardized moments."""
    n = (smoments.size - 1) // 2
    idx = np.arange(n + 1)
    return smoments[idx[:, None] + idx[None, :]]


def _ldlt_pivots(a: np.ndarray, tol_rel: float) -> tuple[np.ndarray, int]:
    """Pivots of the LDL^T factorization of the symmetric matrix ``a``.

    The running product of the pivots gives every leading principal
    determinant.  Returns ``(pivots, valid)`` where ``valid`` is the number
    of pivots computed before one fell below ``tol_rel`` times its row scale
    (factorization past a vanishing pivot is meaningless).
    """
    m = a.shape[0]
    lower = np.zeros((m, m))
    pivots = np.zeros(m)
    for j in range(m):
        d = a[j, j] - np.sum(lower[j, :j] ** 2 * pivots[:j])
        scale = max(1.0, float(np.max(np.abs(a[j, : j + 1]))))
        if abs(d) <= tol_rel * scale:
            return pivots[:j], j
        pivots[j] = d
        lower[j, j] = 1.0
        for i in range(j + 1, m):
            lower[i, j] = (a[i, j] - np.sum(lower[i, :j] * lower[j, :j] * pivots[:j])) / d
    return pivots, m


def hankel_determinants(state: StandardizedState, tol: float = DEFAULT_REALIZABILITY_TOL) -> np.ndarray:
    """Leading principal Hankel determinants ``(H_4, H_6, ..., H_2n)``.

    Computed as running products of LDL^T pivots; once a pivot vanishes the
    remaining determinants are evaluated directly (reporting only -- the
    pivot products are no longer meaningful there).
    """
    smom = state.standardized_moments()
    if smom.size < 5:
        raise InsufficientOrderError("Hankel determinants need moments up to order >= 4")
    a = hankel_matrix(smom)
    n = a.shape[0] - 1
    pivots, valid = _ldlt_pivots(a, tol)
    dets = np.empty(n - 1)
    running = float(np.prod(pivots[: min(valid, 2)]))
    for k in range(2, n + 1):
        if k < valid:
            running *= pivots[k]
            dets[k - 2] = running
        elif k == valid:
            # first vanishing pivot: determinant is pivot-product * residual
            d = a[k, k] - np.sum(
                np.linalg.solve(a[:k, :k], a[:k, k]) * a[:k, k]
            ) if valid >= 1 else a[k, k]
            dets[k - 2] = float(np.prod(pivots[:k])) * d
        else:
            dets[k - 2] = float(np.linalg.det(a[: k + 1, : k + 1]))
    return dets


def classify_realizability(
    state: StandardizedState, tol: float = DEFAULT_REALIZABILITY_TOL
) -> RealizabilityReport:
    """Classify a standardized moment set by its Hankel pivot signature.

    Strictly positive pivots throughout mean the set lies in the interior of
    moment space.  A vanishing pivot at index k flags a candidate k-atom
    boundary set; the tail moments are then compared against the moments of
    the unique k-atom measure reconstructed from the leading block (span
    condition).  A negative pivot, or a tail mismatch, is unrealizable.
    """
    if state.degenerate:
        return RealizabilityReport(Realizability.BOUNDARY, 1, np.empty(0))
    smom = state.standardized_moments()
    if smom.size < 5:
        # orders <= 3 with positive variance are always strictly realizable
        return RealizabilityReport(Realizability.STRICT_INTERIOR, None, np.empty(0))
    hankel = hankel_determinants(state, tol)
    a = hankel_matrix(smom)
    n = a.shape[0] - 1
    pivots, valid = _ldlt_pivots(a, tol)
    if np.any(pivots[:valid] < 0.0):
        return RealizabilityReport(Realizability.UNREALIZABLE, None, hankel)
    if valid == n + 1:
        return RealizabilityReport(Realizability.STRICT_INTERIOR, None, hankel)

    rank = valid
    # residual pivot at the breakdown index decides boundary vs unrealizable
    residual = a[rank, rank] - float(
        np.sum(np.linalg.solve(a[:rank, :rank], a[:rank, rank]) * a[:rank, rank])
    )
    scale = max(1.0, float(np.max(np.abs(a[rank, : rank + 1]))))
    if residual < -tol * scale or np.any(pivots[:valid] < 0.0):
        return RealizabilityReport(Realizability.UNREALIZABLE, None, hankel)

    # span condition: the tail must reproduce the unique rank-atom measure
    from .orthopoly import chebyshev, gauss_quadrature

    try:
        rc = chebyshev(smom[: 2 * rank], tol_rel=tol)
        quad = gauss_quadrature(rc, rank)
    except Exception:
        return RealizabilityReport(Realizability.UNREALIZABLE, None, hankel)
    powers = quad.abscissas[None, :] ** np.arange(smom.size)[:, None]
    regen = powers @ quad.weights
    mismatch = np.abs(regen - smom) > tol * np.maximum(1.0, np.abs(smom)) * 100.0
    if np.any(mismatch):
        return RealizabilityReport(Realizability.UNREALIZABLE, None, hankel)
    return RealizabilityReport(Realizability.BOUNDARY, rank, hankel)


def apply_functional(state: StandardizedState, coeffs: np.ndarray) -> float:
    """Apply the moment linear functional to a polynomial.

    ``<p> = sum_i coeffs[i] * S_i`` with coefficients in ascending degree.
    """
    c = np.asarray(coeffs, dtype=float)
    smom = state.standardized_moments()
    if c.size > smom.size:
        raise DegreeTooHighError(
            f"polynomial degree {c.size - 1} exceeds moment order {smom.size - 1}"
        )
    return float(np.dot(c, smom[: c.size]))


def functional_on_moments(smoments: np.ndarray, coeffs: np.ndarray) -> float:
    """Same as :func:`apply_functional` but on a raw sequence of moments."""
    c = np.asarray(coeffs, dtype=float)
    if c.size > smoments.size:
        raise DegreeTooHighError(
            f"polynomial degree {c.size - 1} exceeds moment order {smoments.size - 1}"
        )
    return float(np.dot(c, smoments[: c.size]))


def gaussian_standardized_moments(order: int) -> np.ndarray:
    """Standardized moments of a Gaussian: ``S_{2k+1} = 0``, ``S_{2k+2} = (2k+1) S_{2k}``."""
    s = np.zeros(order + 1)
    s[0] = 1.0
    if order >= 2:
        s[2] = 1.0
    for k in range(4, order + 1, 2):
        s[k] = (k - 1) * s[k - 2]
    return s


def maxwellian_moments(order: int, m0: float, mean: float, variance: float) -> np.ndarray:
    """Raw moments of a Maxwellian (Gaussian) velocity distribution."""
    gauss = gaussian_standardized_moments(order)
    state = StandardizedState(m0, mean, variance, gauss[3:] if order >= 3 else np.empty(0))
    if variance <= 0.0:
        return m0 * mean ** np.arange(order + 1, dtype=float)
    return standardized_to_raw(state, order)
