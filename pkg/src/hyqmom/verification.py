"""Randomized property suites: round-trip, interlacing, constraints, spectrum.

Shared between the ``verify`` CLI subcommand and the acceptance tests.  Each
suite returns a small dict with ``passed``, the worst observed error and the
sample count, so callers can print one line per suite.
"""

from __future__ import annotations

import numpy as np

from .closure import (
    assemble_characteristic,
    check_constraints,
    hyqmom_close,
    hyqmom_close_general,
    verify_factorization_fd,
)
from .orthopoly import RecurrenceCoefficients, chebyshev, gauss_quadrature, reverse_chebyshev


def random_interior_moments(
    rng: np.random.Generator,
    n: int,
    a_span: float = 0.8,
    b_low: float = 0.3,
    b_high: float = 1.5,
    m0_span: tuple[float, float] = (0.5, 2.0),
) -> np.ndarray:
    """Strictly realizable random moments ``(M_0, ..., M_2n)``.

    Generated through the recurrence coefficients (positive ``b_k`` is
    exactly the strict-interior condition), so realizability holds by
    construction.
    """
    a = rng.uniform(-a_span, a_span, size=n)
    b = np.empty(n + 1)
    b[0] = rng.uniform(*m0_span)
    b[1:] = rng.uniform(b_low, b_high, size=n)
    rc = RecurrenceCoefficients(a, b)
    return reverse_chebyshev(rc, 2 * n)


def random_kinetic_moments(rng: np.random.Generator, n: int) -> np.ndarray:
    """Standardized moments of a randomly perturbed Maxwellian-like state.

    Coefficients ``b_k ~ k * U(0.7, 1.3)`` and ``a_k ~ U(-0.5, 0.5)`` around
    the Gaussian values, with the standardized normalization ``a_0 = 0``,
    ``b_0 = b_1 = 1`` exact.  These are the states a kinetic closure operates
    on, and they keep the moment magnitudes commensurate with the orthogonal
    polynomial norms (the functional constraint check is condition-limited
    for families whose ``prod b_k`` shrinks while the moments stay large).
    """
    a = np.concatenate(([0.0], rng.uniform(-0.5, 0.5, size=max(0, n - 1))))
    bk = np.arange(2, n + 1) * rng.uniform(0.7, 1.3, size=max(0, n - 1))
    b = np.concatenate(([1.0, 1.0], bk))
    return reverse_chebyshev(RecurrenceCoefficients(a, b), 2 * n)


def random_boundary_moments(
    rng: np.random.Generator, n: int, atoms: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Moments of a random ``atoms``-point measure, plus its atoms and weights."""
    x = np.sort(rng.uniform(-2.0, 2.0, size=atoms))
    while np.any(np.diff(x) < 0.2):
        x = np.sort(rng.uniform(-2.0, 2.0, size=atoms))
    w = rng.uniform(0.2, 1.0, size=atoms)
    m = (x[None, :] ** np.arange(2 * n + 1)[:, None]) @ w
    return m, x, w


def roundtrip_suite(seed: int = 0, samples: int = 1000, n_max: int = 10, n_spot: int = 20,
                    spot_samples: int = 10, tol: float = 1e-10) -> dict:
    """Moments -> coefficients -> moments and the reverse composition."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        n = int(rng.integers(1, n_max + 1))
        m = random_interior_moments(rng, n)
        rc = chebyshev(m)
        back = reverse_chebyshev(rc, 2 * n)
        worst = max(worst, float(np.max(np.abs(back - m) / np.maximum(1e-30, np.abs(m)))))
    for _ in range(spot_samples):
        m = random_interior_moments(rng, n_spot, a_span=0.3, b_low=0.6, b_high=1.4)
        rc = chebyshev(m)
        back = reverse_chebyshev(rc, 2 * n_spot)
        worst = max(worst, float(np.max(np.abs(back - m) / np.maximum(1e-30, np.abs(m)))))
    return {"name": "roundtrip", "passed": worst < tol, "worst": worst,
            "samples": samples + spot_samples, "tol": tol}


def interlacing_suite(seed: int = 1, samples: int = 200, n_max: int = 10) -> dict:
    """Strict interlacing of the closed-system roots for interior states."""
    rng = np.random.default_rng(seed)
    failures = 0
    min_gap = np.inf
    total = 0
    for _ in range(samples):
        n = int(rng.integers(1, n_max + 1))
        m = random_interior_moments(rng, n)
        res = hyqmom_close(m, on_boundary="raise")
        total += 1
        merged = np.empty(2 * n + 1)
        merged[0::2] = res.eigenvalues_r
        merged[1::2] = res.eigenvalues_q
        gap = float(np.min(np.diff(merged)))
        min_gap = min(min_gap, gap)
        if not res.interlaced:
            failures += 1
    return {"name": "interlacing", "passed": failures == 0, "failures": failures,
            "min_gap": min_gap, "samples": total}


def constraints_suite(seed: int = 2, samples: int = 200, n_max: int = 10,
                      tol: float = 1e-9) -> dict:
    """Functional constraints <P> = <P'> = <X P'> = 0 for every closure."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        n = int(rng.integers(1, n_max + 1))
        smom = random_kinetic_moments(rng, n)
        res = hyqmom_close(smom, on_boundary="raise", with_eigen=False)
        smom_closed = np.concatenate((smom, [res.m_next]))
        _, r, p = assemble_characteristic(res.rc)
        triple = check_constraints(smom_closed, p)
        # <Q_n^2> = b_0 b_1 ... b_n of the standardized coefficients
        qn_sq = float(np.prod(res.rc.b[: n + 1]))
        worst = max(worst, max(abs(v) for v in triple) / max(qn_sq, 1e-30))
    return {"name": "constraints", "passed": worst < tol, "worst": worst,
            "samples": samples, "tol": tol}


def fd_spectrum_suite(seed: int = 3, samples: int = 100, n_max: int = 5,
                      tol: float = 1e-5) -> dict:
    """FD flux-Jacobian spectrum against the factored characteristic roots.

    Uses the perturbed-Maxwellian family: its Hermite-like root spacing keeps
    the companion-matrix eigenproblem well conditioned, so the comparison is
    limited by FD truncation rather than by eigenvalue sensitivity of
    near-boundary root clusters.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        n = int(rng.integers(1, n_max + 1))
        m = random_kinetic_moments(rng, n)
        worst = max(worst, verify_factorization_fd(m))
    return {"name": "fd-spectrum", "passed": worst < tol, "worst": worst,
            "samples": samples, "tol": tol}


def boundary_suite(seed: int = 4, samples: int = 100, tol: float = 1e-10) -> dict:
    """General-closure branches: zero density, Dirac, k-atom boundary."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    count = 0
    for _ in range(samples):
        n = int(rng.integers(3, 7))
        # zero density
        res = hyqmom_close_general(np.zeros(2 * n + 1))
        worst = max(worst, abs(res.m_next))
        # Dirac
        u = float(rng.uniform(-2, 2))
        w = float(rng.uniform(0.5, 2))
        dirac = w * u ** np.arange(2 * n + 1)
        res = hyqmom_close_general(dirac)
        expect = w * u ** (2 * n + 1)
        worst = max(worst, abs(res.m_next - expect) / max(1.0, abs(expect)))
        # k atoms, k < n
        k = int(rng.integers(2, n))
        m, x, wgt = random_boundary_moments(rng, n, k)
        res = hyqmom_close_general(m[: 2 * n + 1])
        expect = float(np.sum(wgt * x ** (2 * n + 1)))
        worst = max(worst, abs(res.m_next - expect) / max(1.0, abs(expect)))
        count += 3
    return {"name": "boundary-branches", "passed": worst < tol, "worst": worst,
            "samples": count, "tol": tol}


def quadrature_suite(seed: int = 5, samples: int = 200, n_max: int = 10,
                     tol: float = 1e-10) -> dict:
    """Gauss rules reproduce their generating moments up to order 2k-1."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        n = int(rng.integers(1, n_max + 1))
        m = random_interior_moments(rng, n)
        rc = chebyshev(m)
        quad = gauss_quadrature(rc, n)
        regen = (quad.abscissas[None, :] ** np.arange(2 * n)[:, None]) @ quad.weights
        worst = max(
            worst, float(np.max(np.abs(regen - m[: 2 * n]) / np.maximum(1.0, np.abs(m[: 2 * n]))))
        )
        if np.any(quad.weights <= 0.0):
            worst = np.inf
    return {"name": "quadrature", "passed": worst < tol, "worst": worst,
            "samples": samples, "tol": tol}


ALL_SUITES = (
    roundtrip_suite,
    interlacing_suite,
    constraints_suite,
    fd_spectrum_suite,
    boundary_suite,
    quadrature_suite,
)


def run_all(seed: int = 0, samples: int | None = None) -> list[dict]:
    """Run every suite; ``samples`` overrides each suite's default count."""
    results = []
    for idx, suite in enumerate(ALL_SUITES):
        kwargs = {"seed": seed + idx}
        if samples is not None:
            kwargs["samples"] = samples
        results.append(suite(**kwargs))
    return results
