"""Exact moment solution of the free-transport Riemann problem.

The kinetic equation with pure transport propagates the initial distribution
along characteristics, ``f(t, x, u) = f_0(x - u t, u)``.  With Maxwellian
initial data whose mean velocity jumps at ``x = 0``, every moment at
``(t, x)`` splits into two Gaussian half-range integrals with cut
``c = x / t``, which evaluate in closed form through the recursion
``J_k = c^{k-1} phi(c) + (k - 1) J_{k-2}`` anchored at the complementary
error function.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.special import erfc

_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class RiemannSetup:
    """Riemann initial data: mean velocity step, common density and variance."""

    density: float = 1.0
    mean_left: float = 1.0
    mean_right: float = -1.0
    variance: float = 1.0 / 3.0
    max_order: int = 41

    def __post_init__(self):
        if self.density <= 0.0 or self.variance <= 0.0:
            raise ValueError("density and variance must be positive")


def _phi(z: np.ndarray) -> np.ndarray:
    return _INV_SQRT_2PI * np.exp(-0.5 * z * z)


def _upper_standard(alpha: np.ndarray, k_max: int) -> np.ndarray:
    """Half-range standard-normal moments ``J_k = int_alpha^inf z^k phi(z) dz``.

    Shape ``(len(alpha), k_max + 1)``.  The two base cases use erfc and the
    density; the upward recursion couples every other order.
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    out = np.empty((alpha.size, k_max + 1))
    pdf = _phi(alpha)
    out[:, 0] = 0.5 * erfc(alpha / np.sqrt(2.0))
    if k_max >= 1:
        out[:, 1] = pdf
    for k in range(2, k_max + 1):
        out[:, k] = alpha ** (k - 1) * pdf + (k - 1) * out[:, k - 2]
    return out


def _half_range_moments(
    mean: float, sigma: float, cut: np.ndarray, k_max: int, upper: bool
) -> np.ndarray:
    """Moments of a Gaussian N(mean, sigma^2) over ``(cut, inf)`` or ``(-inf, cut)``."""
    cut = np.atleast_1d(np.asarray(cut, dtype=float))
    if upper:
        alpha = (cut - mean) / sigma
        j = _upper_standard(alpha, k_max)
    else:
        alpha = (mean - cut) / sigma
        j = _upper_standard(alpha, k_max)
        signs = (-1.0) ** np.arange(k_max + 1)
        j = j * signs  # int_{-inf}^{cut} z^k phi = (-1)^k J_k(-alpha)
    out = np.zeros((cut.size, k_max + 1))
    for k in range(k_max + 1):
        for i in range(k + 1):
            out[:, k] += comb(k, i) * mean ** (k - i) * sigma**i * j[:, i]
    return out


def exact_moments(setup: RiemannSetup, t: float, x: np.ndarray, k_max: int) -> np.ndarray:
    """Exact moments ``M_k(t, x)`` for ``k = 0..k_max``, shape ``(len(x), k_max + 1)``.

    For ``t > 0`` each moment is the sum of the left-state Gaussian integrated
    over ``u > x/t`` and the right-state Gaussian over ``u < x/t``.  ``t = 0``
    returns the piecewise-Maxwellian initial condition (right state at x >= 0).
    """
    if k_max > setup.max_order:
        raise ValueError(f"k_max {k_max} exceeds setup.max_order {setup.max_order}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if t < 0.0:
        raise ValueError("t must be >= 0")
    if t == 0.0:
        return initial_moments(setup, x, k_max)
    sigma = np.sqrt(setup.variance)
    cut = x / t
    left = _half_range_moments(setup.mean_left, sigma, cut, k_max, upper=True)
    right = _half_range_moments(setup.mean_right, sigma, cut, k_max, upper=False)
    return setup.density * (left + right)


def initial_moments(setup: RiemannSetup, x: np.ndarray, k_max: int) -> np.ndarray:
    """Piecewise-Maxwellian moments of the initial condition."""
    from .moments import maxwellian_moments

    x = np.atleast_1d(np.asarray(x, dtype=float))
    left = maxwellian_moments(k_max, setup.density, setup.mean_left, setup.variance)
    right = maxwellian_moments(k_max, setup.density, setup.mean_right, setup.variance)
    out = np.where((x < 0.0)[:, None], left[None, :], right[None, :])
    return out
