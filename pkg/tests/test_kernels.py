"""Backend equivalence: numba kernels vs pure-numpy vs scalar reference."""

import numpy as np
import pytest

import hyqmom.kernels_numpy as knp
from hyqmom.closure import hyqmom_close, qmom_close
from hyqmom.riemann import RiemannSetup
from hyqmom.solver import SolverConfig, initialize
from hyqmom.verification import random_interior_moments

try:
    import hyqmom.kernels_numba as knb

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

needs_numba = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not available")


def _random_batch(rng, n, cells):
    return np.array([random_interior_moments(rng, n) for _ in range(cells)])


class TestNumpyKernelAgainstReference:
    def test_closure_matches_scalar_path(self):
        rng = np.random.default_rng(0)
        for n in (1, 2, 3, 5, 8):
            states = _random_batch(rng, n, 40)
            top, lo, hi, status = knp.closure_speeds_batch(states, n)
            assert np.all(status == 0)
            for i in range(states.shape[0]):
                res = hyqmom_close(states[i], on_boundary="raise")
                assert top[i] == pytest.approx(res.m_next, rel=1e-12, abs=1e-12)
                assert lo[i] == pytest.approx(res.eigenvalues_r[0], rel=1e-10, abs=1e-10)
                assert hi[i] == pytest.approx(res.eigenvalues_r[-1], rel=1e-10, abs=1e-10)

    def test_qmom_closure_matches_scalar_path(self):
        rng = np.random.default_rng(1)
        for n in (1, 2, 4):
            states = _random_batch(rng, n, 30)[:, : 2 * n]
            top, lo, hi, status = knp.closure_speeds_batch(states, n, qmom=True)
            assert np.all(status == 0)
            for i in range(states.shape[0]):
                assert top[i] == pytest.approx(qmom_close(states[i]), rel=1e-12, abs=1e-12)

    def test_flags_boundary_and_unrealizable(self):
        n = 3
        rng = np.random.default_rng(2)
        states = _random_batch(rng, n, 6)
        states[1] = [1, 2, 4, 8, 16, 32, 64]  # Dirac at 2
        states[3, -1] -= 1e3  # wreck the top moment
        states[4, 0] = -0.5
        top, lo, hi, status = knp.closure_speeds_batch(states, n)
        assert status[0] == 0 and status[2] == 0 and status[5] == 0
        assert status[1] > 0
        assert status[3] < 0
        assert status[4] == -1


@needs_numba
class TestBackendEquivalence:
    def test_closure_and_speeds_match(self):
        rng = np.random.default_rng(3)
        for n in (1, 2, 3, 6, 10):
            states = _random_batch(rng, n, 50)
            t_np, lo_np, hi_np, st_np = knp.closure_speeds_batch(states, n)
            t_nb, lo_nb, hi_nb, st_nb = knb.closure_speeds_batch(states, n)
            np.testing.assert_array_equal(st_np, st_nb)
            np.testing.assert_allclose(t_nb, t_np, rtol=1e-12, atol=1e-12)
            np.testing.assert_allclose(lo_nb, lo_np, rtol=1e-10, atol=1e-11)
            np.testing.assert_allclose(hi_nb, hi_np, rtol=1e-10, atol=1e-11)

    def test_status_flags_match(self):
        n = 3
        rng = np.random.default_rng(4)
        states = _random_batch(rng, n, 5)
        states[1] = [1, 2, 4, 8, 16, 32, 64]
        states[3, 0] = 0.0
        _, _, _, st_np = knp.closure_speeds_batch(states, n)
        _, _, _, st_nb = knb.closure_speeds_batch(states, n)
        np.testing.assert_array_equal(st_np, st_nb)

    def test_hll_update_matches(self):
        rng = np.random.default_rng(5)
        config = SolverConfig(n=2, cells=64, t_end=0.01)
        grid = initialize(config, RiemannSetup())
        states = grid.states + 1e-3 * rng.standard_normal(grid.states.shape)
        top, lo, hi, status = knp.closure_speeds_batch(states, 2)
        assert np.all(status == 0)
        lmin, lmax = float(lo.min()), float(hi.max())
        for speeds in [(lmin, lmax), (0.5, lmax), (lmin, -0.5)]:
            out_np = knp.hll_update(states, top, speeds[0], speeds[1], 0.3)
            out_nb = knb.hll_update(states, top, speeds[0], speeds[1], 0.3)
            np.testing.assert_allclose(out_nb, out_np, rtol=1e-13, atol=1e-14)

    def test_tridiag_eigen_matches_lapack(self):
        rng = np.random.default_rng(6)
        for _ in range(200):
            m = int(rng.integers(1, 25))
            diag = rng.uniform(-3, 3, size=m)
            off = rng.uniform(0.0, 2.0, size=max(m - 1, 0))
            v_np, f_np = knp.tridiag_eigen(diag, off, True)
            v_nb, f_nb = knb.tridiag_eigen(diag, off, True)
            np.testing.assert_allclose(v_nb, v_np, rtol=1e-12, atol=1e-12)
            np.testing.assert_allclose(f_nb, f_np, rtol=1e-7, atol=1e-9)

    def test_ql_handles_split_matrices(self):
        # zero off-diagonal entries split the matrix into blocks
        diag = np.array([2.0, -1.0, 0.5, 0.5])
        off = np.array([0.0, 1.0, 0.0])
        v_nb, _ = knb.tridiag_eigen(diag, off, False)
        v_np, _ = knp.tridiag_eigen(diag, off, False)
        np.testing.assert_allclose(v_nb, v_np, rtol=1e-13, atol=1e-13)


@needs_numba
def test_full_run_backends_agree(monkeypatch):
    """Same short solve through both kernel sets; states agree to eigen noise."""
    import hyqmom.backend as backend
    from hyqmom.solver import run

    results = {}
    for impl, name in ((knp, "numpy"), (knb, "numba")):
        monkeypatch.setattr(backend, "closure_speeds_batch", impl.closure_speeds_batch)
        monkeypatch.setattr(backend, "hll_update", impl.hll_update)
        grid, stats = run(SolverConfig(n=3, cells=200, t_end=0.01))
        results[name] = (grid.states, stats["steps"])
    assert results["numpy"][1] == results["numba"][1]
    np.testing.assert_allclose(
        results["numba"][0], results["numpy"][0], rtol=1e-9, atol=1e-11
    )


def test_tolerance_constants_agree():
    assert knp.TOL_BREAKDOWN == pytest.approx(1e-12)
    assert knp.TOL_UNREAL == pytest.approx(1e-10)
    if HAVE_NUMBA:
        assert knb.TOL_BREAKDOWN == knp.TOL_BREAKDOWN
        assert knb.TOL_UNREAL == knp.TOL_UNREAL
