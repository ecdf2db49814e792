"""First-order HLL finite-volume solver for the closed 1-D moment system.

The update is fully conservative: interface fluxes use the two extreme
characteristic speeds over the whole domain (recomputed every step, as the
closure makes them state-dependent), ghost cells copy the edge states, and
the time step follows the CFL condition with the final step clipped to land
exactly on ``t_end``.
"""

from __future__ import annotations

import time as _time
import warnings
from dataclasses import dataclass

import numpy as np

from . import backend
from .kernels_numpy import TOL_UNREAL
from .closure import hyqmom_close, hyqmom_close_general, qmom_close
from .errors import (
    ConvergenceFailureError,
    DegenerateWaveFanError,
    PostulatedHyperbolicityWarning,
    RealizabilityLossError,
    UnrealizableError,
)
from .moments import maxwellian_moments
from .riemann import RiemannSetup, exact_moments

CLOSURES = ("hyqmom", "qmom", "gamma")


@dataclass
class SolverConfig:
    """Run parameters; defaults reproduce the reference Riemann experiment."""

    n: int = 2
    cells: int = 4000
    x_min: float = -0.5
    x_max: float = 0.5
    cfl: float = 0.5
    t_end: float = 0.1
    closure: str = "hyqmom"
    gamma: float = 0.0
    boundary: str = "zero-gradient"
    local_speeds: bool = False
    strict_realizability: bool = True

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.cells < 2:
            raise ValueError("cells must be >= 2")
        if not (0.0 < self.cfl <= 1.0):
            raise ValueError("cfl must be in (0, 1]")
        if self.x_min >= self.x_max:
            raise ValueError("x_min must be < x_max")
        if self.closure not in CLOSURES:
            raise ValueError(f"closure must be one of {CLOSURES}")
        if self.closure == "gamma" and self.n != 2:
            raise ValueError("the gamma closure family is defined for n = 2 only")

    @property
    def width(self) -> int:
        """State vector length per cell."""
        return 2 * self.n if self.closure == "qmom" else 2 * self.n + 1

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.cells


@dataclass
class SolverGrid:
    states: np.ndarray  # (cells, width)
    time: float
    dx: float
    x: np.ndarray  # cell centers


def initialize(config: SolverConfig, setup: RiemannSetup | None = None) -> SolverGrid:
    """Grid of piecewise-Maxwellian moments with the mean-velocity step at x=0."""
    if setup is None:
        setup = RiemannSetup()
    dx = config.dx
    x = config.x_min + dx * (np.arange(config.cells) + 0.5)
    order = config.width - 1
    left = maxwellian_moments(order, setup.density, setup.mean_left, setup.variance)
    right = maxwellian_moments(order, setup.density, setup.mean_right, setup.variance)
    states = np.where((x < 0.0)[:, None], left[None, :], right[None, :])
    if config.n > 9:
        warnings.warn(
            f"n={config.n}: hyperbolicity beyond n=9 is postulated, not proven",
            PostulatedHyperbolicityWarning,
            stacklevel=2,
        )
    return SolverGrid(states=np.ascontiguousarray(states), time=0.0, dx=dx, x=x)


def _gamma_closure_speeds(states: np.ndarray, gamma: float):
    """Closing moment and speed extremes for the n=2 gamma family (vectorized)."""
    m0 = states[:, 0]
    status = np.zeros(states.shape[0], dtype=np.int64)
    status[m0 <= 0.0] = -1
    safe0 = np.where(m0 > 0.0, m0, 1.0)
    mean = states[:, 1] / safe0
    c2 = states[:, 2] / safe0 - mean**2
    status[(status == 0) & (c2 <= 0.0)] = -2
    safe2 = np.where(c2 > 0.0, c2, 1.0)
    c3 = states[:, 3] / safe0 - 3.0 * mean * safe2 - mean**3
    c4 = states[:, 4] / safe0 - 4.0 * mean * c3 - 6.0 * mean**2 * safe2 - mean**4
    s3 = c3 / safe2**1.5
    s4 = c4 / safe2**2
    h4 = s4 - s3**2 - 1.0
    status[(status == 0) & (h4 < -TOL_UNREAL * np.maximum(1.0, np.abs(s4)))] = -2
    h4 = np.maximum(h4, 0.0)
    s5 = s3 * (2.0 + s3**2 + 2.5 * h4) + gamma * h4 * np.sqrt(4.0 + s3**2)
    c5 = s5 * safe2**2.5
    top = m0 * (c5 + 5.0 * mean * c4 + 10.0 * mean**2 * c3 + 10.0 * mean**3 * safe2 + mean**5)

    # spectrum: roots of the degree-5 characteristic polynomial in scaled form
    sqrt_t = np.sqrt(4.0 + s3**2)
    c_4 = -(2.5 * s3 + gamma * sqrt_t)
    c_3 = -(
        2.0
        - 2.0 * s3**2
        + 2.5 * h4
        + gamma * s3 * (h4 - 2.0 * (4.0 + s3**2)) / sqrt_t
    )
    c_2 = -0.5 * (3.0 * s3 * c_3 + 4.0 * s4 * c_4 + 5.0 * s5)
    c_1 = -(3.0 * c_3 + 4.0 * s3 * c_4 + 5.0 * s4)
    c_0 = 0.5 * (s3 * c_3 + 2.0 * s4 * c_4 + 3.0 * s5)
    nc = states.shape[0]
    comp = np.zeros((nc, 5, 5))
    comp[:, 1, 0] = comp[:, 2, 1] = comp[:, 3, 2] = comp[:, 4, 3] = 1.0
    comp[:, 0, 4] = -c_0
    comp[:, 1, 4] = -c_1
    comp[:, 2, 4] = -c_2
    comp[:, 3, 4] = -c_3
    comp[:, 4, 4] = -c_4
    flagged = status != 0
    comp[flagged] = 0.0
    mu = np.real(np.linalg.eigvals(comp))
    root = np.sqrt(safe2)
    lo = mean + root * np.min(mu, axis=1)
    hi = mean + root * np.max(mu, axis=1)
    top[flagged] = 0.0
    lo[flagged] = 0.0
    hi[flagged] = 0.0
    return top, lo, hi, status


def _closure_pass(states: np.ndarray, config: SolverConfig, t: float, diagnostics=None):
    """Closing moments, per-cell speed extremes and realizability handling."""
    if config.closure == "gamma":
        top, lo, hi, status = _gamma_closure_speeds(states, config.gamma)
    else:
        top, lo, hi, status = backend.closure_speeds_batch(
            states, config.n, qmom=config.closure == "qmom"
        )
    if np.any(status == backend.STATUS_NO_CONVERGENCE):
        cell = int(np.argmax(status == backend.STATUS_NO_CONVERGENCE))
        raise ConvergenceFailureError(f"eigenvalue sweep cap hit in cell {cell}")
    flagged = np.flatnonzero(status != 0)
    for cell in flagged:
        st = int(status[cell])
        if config.closure != "hyqmom":
            raise RealizabilityLossError(
                cell, t, f"cell {cell} left the strict domain of the {config.closure} closure"
            )
        try:
            res = hyqmom_close_general(states[cell], with_eigen=False)
        except UnrealizableError as err:
            if diagnostics is not None and not config.strict_realizability:
                diagnostics.append(
                    {"time": t, "cell": cell, "status": st, "hankel": _hankel_of(states[cell])}
                )
            raise RealizabilityLossError(cell, t, str(err)) from err
        if diagnostics is not None:
            diagnostics.append({"time": t, "cell": cell, "status": st, "branch": res.branch})
        top[cell] = res.m_next
        if res.speeds is not None and res.speeds.size:
            lo[cell] = float(np.min(res.speeds))
            hi[cell] = float(np.max(res.speeds))
        else:
            lo[cell] = hi[cell] = 0.0
    return top, lo, hi


def _hankel_of(state: np.ndarray) -> list[float]:
    from .moments import hankel_determinants, raw_to_standardized

    try:
        return hankel_determinants(raw_to_standardized(state)).tolist()
    except Exception:
        return []


def wave_speeds(grid: SolverGrid, config: SolverConfig) -> tuple[float, float]:
    """Global extreme characteristic speeds over all cells."""
    _, lo, hi = _closure_pass(grid.states, config, grid.time)
    return float(np.min(lo)), float(np.max(hi))


def _close_top(state: np.ndarray, config: SolverConfig) -> float:
    if config.closure == "qmom":
        return qmom_close(state)
    if config.closure == "gamma":
        top, _, _, status = _gamma_closure_speeds(state[None, :], config.gamma)
        if status[0] != 0:
            raise UnrealizableError("state outside the gamma-closure domain")
        return float(top[0])
    return hyqmom_close(state, with_eigen=False).m_next


def hll_flux(
    left: np.ndarray,
    right: np.ndarray,
    lam_min: float,
    lam_max: float,
    config: SolverConfig | None = None,
) -> np.ndarray:
    """HLL interface flux between two moment states.

    ``F(M) = (M_1, ..., M_top)`` with the top component closed; the flux is
    upwind outside the wave fan and the standard two-wave average inside.
    """
    if lam_min > lam_max:
        raise ValueError("lam_min must be <= lam_max")
    if lam_min == lam_max:
        raise DegenerateWaveFanError("coincident wave speeds")
    left = np.asarray(left, dtype=float)
    right = np.asarray(right, dtype=float)
    if config is None:
        n = (left.size - 1) // 2
        config = SolverConfig(n=max(n, 1), cells=2)
    f_left = np.concatenate((left[1:], [_close_top(left, config)]))
    f_right = np.concatenate((right[1:], [_close_top(right, config)]))
    if lam_min >= 0.0:
        return f_left
    if lam_max <= 0.0:
        return f_right
    return (
        lam_max * f_left - lam_min * f_right + lam_min * lam_max * (right - left)
    ) / (lam_max - lam_min)


def _hll_update_local(states, top, lo, hi, dtdx):
    """Per-interface wave speeds (experimental alternative to global speeds)."""
    flux = np.empty_like(states)
    flux[:, :-1] = states[:, 1:]
    flux[:, -1] = top
    ms = np.vstack((states[:1], states, states[-1:]))
    fs = np.vstack((flux[:1], flux, flux[-1:]))
    lo_f = np.minimum(np.concatenate(([lo[0]], lo)), np.concatenate((lo, [lo[-1]])))
    hi_f = np.maximum(np.concatenate(([hi[0]], hi)), np.concatenate((hi, [hi[-1]])))
    f_left, f_right = fs[:-1], fs[1:]
    denom = np.where(hi_f - lo_f == 0.0, 1.0, hi_f - lo_f)[:, None]
    blended = (
        hi_f[:, None] * f_left - lo_f[:, None] * f_right
        + (lo_f * hi_f)[:, None] * (ms[1:] - ms[:-1])
    ) / denom
    f_face = np.where(
        (lo_f >= 0.0)[:, None], f_left, np.where((hi_f <= 0.0)[:, None], f_right, blended)
    )
    return states - dtdx * (f_face[1:] - f_face[:-1])


def advance(grid: SolverGrid, config: SolverConfig, check_updated: bool = True) -> SolverGrid:
    """One conservative step; raises RealizabilityLossError on a bad update."""
    new_states, dt, _, _, _ = _step(grid.states, grid.time, config)
    out = SolverGrid(new_states, grid.time + dt, grid.dx, grid.x)
    if check_updated:
        _closure_pass(out.states, config, out.time)
    return out


def _step(states, t, config: SolverConfig, diagnostics=None):
    top, lo, hi = _closure_pass(states, config, t, diagnostics)
    lam_min = float(np.min(lo))
    lam_max = float(np.max(hi))
    amax = max(abs(lam_min), abs(lam_max))
    if amax > 0.0:
        dt = min(config.cfl * config.dx / amax, config.t_end - t)
    else:
        dt = config.t_end - t
    dtdx = dt / config.dx
    if config.local_speeds:
        new_states = _hll_update_local(states, top, lo, hi, dtdx)
    else:
        new_states = backend.hll_update(states, top, lam_min, lam_max, dtdx)
    return new_states, dt, lam_min, lam_max, top


def run(
    config: SolverConfig,
    setup: RiemannSetup | None = None,
    progress_every: int = 0,
    progress=None,
) -> tuple[SolverGrid, dict]:
    """Integrate the Riemann problem to ``t_end``; returns (grid, stats).

    ``stats`` carries step counts, wall time, final and running extreme
    speeds, exact flux-form conservation budgets and any realizability
    diagnostics (non-strict mode).
    """
    if setup is None:
        setup = RiemannSetup()
    grid = initialize(config, setup)
    diagnostics: list[dict] = []
    t0 = _time.perf_counter()
    totals0 = grid.states.sum(axis=0) * grid.dx
    budget = np.zeros(config.width)
    steps = 0
    lam_lo_run = np.inf
    lam_hi_run = -np.inf
    lam_min = lam_max = 0.0
    while grid.time < config.t_end - 1e-15 * max(1.0, config.t_end):
        new_states, dt, lam_min, lam_max, top = _step(
            grid.states, grid.time, config, diagnostics
        )
        # exact telescoping budget: boundary fluxes are the edge-cell fluxes
        flux_in = np.concatenate((grid.states[0, 1:], [top[0]]))
        flux_out = np.concatenate((grid.states[-1, 1:], [top[-1]]))
        budget += dt * (flux_in - flux_out)
        grid.states = new_states
        grid.time += dt
        steps += 1
        lam_lo_run = min(lam_lo_run, lam_min)
        lam_hi_run = max(lam_hi_run, lam_max)
        if progress_every and progress is not None and steps % progress_every == 0:
            progress(steps, grid.time, lam_min, lam_max)

    # final-state speeds and realizability check
    _, lo, hi = _closure_pass(grid.states, config, grid.time, diagnostics)
    lam_min_final = float(np.min(lo))
    lam_max_final = float(np.max(hi))
    totals = grid.states.sum(axis=0) * grid.dx
    scale = np.maximum(np.abs(grid.states).sum(axis=0) * grid.dx, 1e-300)
    budget_residual = np.abs(totals - totals0 - budget) / scale
    wall = _time.perf_counter() - t0
    amax_final = max(abs(lam_min_final), abs(lam_max_final))
    stats = {
        "steps": steps,
        "wall_time_s": wall,
        "lambda_min_final": lam_min_final,
        "lambda_max_final": lam_max_final,
        "max_abs_eigenvalue": amax_final,
        "lambda_min_run": lam_lo_run if steps else lam_min_final,
        "lambda_max_run": lam_hi_run if steps else lam_max_final,
        "budget_residual": budget_residual.tolist(),
        "boundary_contact": bool(
            max(abs(lam_lo_run if steps else 0.0), abs(lam_hi_run if steps else 0.0))
            * config.t_end
            >= min(abs(config.x_min), abs(config.x_max))
        ),
        "diagnostics": diagnostics,
        "backend": backend.backend_name(),
    }
    return grid, stats


def error_norms(
    grid: SolverGrid, setup: RiemannSetup | None = None, k_max: int | None = None
) -> np.ndarray:
    """Normalized L2 error per moment order against the exact solution."""
    if setup is None:
        setup = RiemannSetup()
    if k_max is None:
        k_max = grid.states.shape[1] - 1
    exact = exact_moments(setup, grid.time, grid.x, k_max)
    num = grid.states[:, : k_max + 1]
    err = np.linalg.norm(num - exact, axis=0)
    ref = np.linalg.norm(exact, axis=0)
    return err / np.where(ref == 0.0, 1.0, ref)
