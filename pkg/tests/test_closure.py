"""Hyperbolic closure, boundary branches, gamma family, characteristic roots."""

import numpy as np
import pytest

from hyqmom.closure import (
    assemble_characteristic,
    check_constraints,
    gamma_family_alpha_n2,
    gamma_family_close_n2,
    hyqmom_close,
    hyqmom_close_general,
    interlacing_check,
    qmom_close,
    verify_factorization_fd,
)
from hyqmom.errors import (
    BoundaryBreakdownError,
    GammaOutOfRangeWarning,
    UnrealizableError,
)
from hyqmom.moments import (
    StandardizedState,
    gaussian_standardized_moments,
    raw_to_standardized,
    standardized_to_raw,
)
from hyqmom.orthopoly import chebyshev
from hyqmom.verification import (
    random_boundary_moments,
    random_interior_moments,
    random_kinetic_moments,
)


class TestInteriorClosure:
    def test_n1_centered(self):
        res = hyqmom_close(np.array([1.0, 0.0, 1.0]))
        assert res.m_next == pytest.approx(0.0, abs=1e-14)
        np.testing.assert_allclose(
            res.speeds, [-np.sqrt(3), 0, np.sqrt(3)], rtol=1e-12, atol=1e-12
        )

    def test_n1_shifted(self):
        # mean 1, variance 1: C_3 = 0 gives M_3 = 3 u C_2 + u^3 = 4
        res = hyqmom_close(np.array([1.0, 1.0, 2.0]))
        assert res.m_next == pytest.approx(4.0, rel=1e-14)

    def test_n2_closed_form(self):
        rng = np.random.default_rng(0)
        for _ in range(300):
            s3 = float(rng.uniform(-2, 2))
            s4 = 1.0 + s3**2 + float(rng.uniform(0.05, 4.0))
            res = hyqmom_close(np.array([1.0, 0.0, 1.0, s3, s4]))
            expected = 0.5 * s3 * (5.0 * s4 - 3.0 * s3**2 - 1.0)
            assert res.m_next == pytest.approx(expected, rel=1e-12, abs=1e-12)

    def test_alpha_is_mean_and_beta_scaling(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            n = int(rng.integers(1, 9))
            m = random_interior_moments(rng, n)
            res = hyqmom_close(m, on_boundary="raise")
            assert res.alpha == pytest.approx(np.mean(res.rc.a[:n]), rel=1e-14)
            assert res.beta == pytest.approx((2 * n + 1) / n * res.rc.b[n], rel=1e-14)
            assert res.beta >= 0.0

    def test_scale_equivariance(self):
        """Closing commutes with affine velocity transforms; eigenvalues map
        as lambda -> mean + sqrt(var) * mu."""
        rng = np.random.default_rng(2)
        for _ in range(40):
            n = int(rng.integers(1, 7))
            smom = random_kinetic_moments(rng, n)
            m0, mean, var = 1.4, float(rng.uniform(-1, 1)), float(rng.uniform(0.3, 2.0))
            state = raw_to_standardized(smom)
            raw = standardized_to_raw(StandardizedState(m0, mean, var, state.s))
            res_std = hyqmom_close(smom, on_boundary="raise")
            res_raw = hyqmom_close(raw, on_boundary="raise")
            np.testing.assert_allclose(
                res_raw.speeds, mean + np.sqrt(var) * res_std.speeds, rtol=1e-9, atol=1e-9
            )
            # closed moment maps through the standardized-to-raw conversion
            smom_closed = np.concatenate((smom, [res_std.m_next]))
            state_c = raw_to_standardized(smom_closed)
            raw_closed = standardized_to_raw(StandardizedState(m0, mean, var, state_c.s))
            assert res_raw.m_next == pytest.approx(raw_closed[-1], rel=1e-8, abs=1e-10)


class TestGeneralClosure:
    def test_zero_density(self):
        res = hyqmom_close_general(np.zeros(5))
        assert res.m_next == 0.0
        assert res.branch == "zero"

    def test_dirac(self):
        res = hyqmom_close_general(np.array([1.0, 2.0, 4.0, 8.0, 16.0]))
        assert res.m_next == pytest.approx(32.0, rel=1e-14)
        assert res.branch == "dirac"
        np.testing.assert_allclose(res.speeds, [2.0])

    def test_two_atoms_symmetric(self):
        # atoms +-1 with weights 1/2: M_5 = 0, detected via the rank-n pivot
        m = np.array([1.0, 0.0, 1.0, 0.0, 1.0])
        res = hyqmom_close_general(m)
        assert res.m_next == pytest.approx(0.0, abs=1e-14)

    def test_k_atom_power_sums(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            n = int(rng.integers(3, 8))
            k = int(rng.integers(1, n))
            m, x, w = random_boundary_moments(rng, n, k)
            res = hyqmom_close_general(m)
            expected = float(np.sum(w * x ** (2 * n + 1)))
            assert res.m_next == pytest.approx(expected, rel=1e-10, abs=1e-10)
            if k >= 2:
                assert res.branch == "atoms"
                np.testing.assert_allclose(res.speeds, x, rtol=1e-8, atol=1e-8)

    def test_unrealizable_raises(self):
        with pytest.raises(UnrealizableError):
            hyqmom_close_general(np.array([1.0, 0.0, 1.0, 0.0, 0.5]))

    def test_missed_breakdown_resolved_by_span_condition(self):
        # accumulated roundoff leaves this 5-atom measure's vanishing rank-5
        # pivot slightly above the breakdown threshold, so the violation only
        # surfaces at rank 6; the reconstruction scan must still identify the
        # measure instead of declaring the moments unrealizable (exact floats
        # matter: rounding them moves the state ~1e-8 into the interior)
        x = np.array([-1.846292160094401, -1.3789773877767515, -0.7905941558810454,
                      -0.5632712175517298, 0.637304683163562])
        w = np.array([0.5130495210343662, 0.31141934857678333, 0.41378960667298154,
                      0.31977561106041286, 0.5066408683365498])
        n = 6
        m = (x[None, :] ** np.arange(2 * n + 1)[:, None]) @ w
        res = hyqmom_close_general(m)
        assert res.branch == "atoms"
        np.testing.assert_allclose(res.speeds, x, rtol=1e-7, atol=1e-7)
        expected = float(np.sum(w * x ** (2 * n + 1)))
        assert res.m_next == pytest.approx(expected, rel=1e-10)

    def test_interior_falls_through(self):
        m = np.array([1.0, 0.0, 1.0, -1.0, 5.0])
        a = hyqmom_close_general(m)
        b = hyqmom_close(m)
        assert a.m_next == pytest.approx(b.m_next, rel=1e-14)
        assert a.branch == "interior"

    def test_strict_path_reroutes(self):
        m = np.array([1.0, 2.0, 4.0, 8.0, 16.0])
        res = hyqmom_close(m, on_boundary="general")
        assert res.branch == "dirac"
        with pytest.raises(BoundaryBreakdownError):
            hyqmom_close(m, on_boundary="raise")


class TestQmom:
    def test_two_atom_fixture(self):
        assert qmom_close(np.array([1.0, 0.0, 1.0, 0.0])) == pytest.approx(1.0, rel=1e-14)

    def test_boundary_identity(self):
        # b_2 = 0 forces S_4 = S_3^2 + 1
        rng = np.random.default_rng(4)
        for _ in range(50):
            s3 = float(rng.uniform(-2, 2))
            val = qmom_close(np.array([1.0, 0.0, 1.0, s3]))
            assert val == pytest.approx(s3**2 + 1.0, rel=1e-12)

    def test_reproduces_atomic_measures(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            n = int(rng.integers(2, 7))
            m, x, w = random_boundary_moments(rng, n, n)
            val = qmom_close(m[: 2 * n])
            expected = float(np.sum(w * x ** (2 * n)))
            assert val == pytest.approx(expected, rel=1e-9)


class TestGammaFamily:
    def test_gamma_zero_matches_hyqmom(self):
        rng = np.random.default_rng(6)
        for _ in range(1000):
            s3 = float(rng.uniform(-2, 2))
            s4 = 1.0 + s3**2 + float(rng.uniform(0.05, 4.0))
            closed = gamma_family_close_n2(s3, s4, 0.0)
            res = hyqmom_close(np.array([1.0, 0.0, 1.0, s3, s4]), with_eigen=False)
            assert closed == pytest.approx(res.m_next, rel=1e-12, abs=1e-12)

    def test_symmetric_base_vanishes(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            h4 = float(rng.uniform(0.1, 3.0))
            gamma = float(rng.uniform(-2, 2))
            val = gamma_family_close_n2(0.0, 1.0 + h4, gamma)
            assert val == pytest.approx(2.0 * gamma * h4, rel=1e-13)

    def test_recovered_a2(self):
        # feeding the closed moment back through the recurrence transform
        # recovers a_2 = S_3/2 + gamma sqrt(4 + S_3^2)
        rng = np.random.default_rng(8)
        for _ in range(50):
            s3 = float(rng.uniform(-1.5, 1.5))
            s4 = 1.0 + s3**2 + float(rng.uniform(0.2, 3.0))
            gamma = float(rng.uniform(-2.0, 2.0))
            s5 = gamma_family_close_n2(s3, s4, gamma)
            rc = chebyshev(np.array([1.0, 0.0, 1.0, s3, s4, s5]))
            assert rc.a[2] == pytest.approx(gamma_family_alpha_n2(s3, gamma), rel=1e-9, abs=1e-9)

    def test_out_of_range_warns(self):
        with pytest.warns(GammaOutOfRangeWarning):
            gamma_family_close_n2(0.5, 2.0, 2.5)

    def test_unrealizable(self):
        with pytest.raises(UnrealizableError):
            gamma_family_close_n2(1.0, 1.5, 0.0)


class TestCharacteristicPolynomials:
    def test_n1_fixture(self):
        res = hyqmom_close(np.array([1.0, 0.0, 1.0]))
        q, r, p = assemble_characteristic(res.rc)
        np.testing.assert_allclose(q, [0, 1], atol=1e-14)
        np.testing.assert_allclose(r, [-3, 0, 1], atol=1e-14)
        np.testing.assert_allclose(p, [0, -3, 0, 1], atol=1e-14)

    def test_gaussian_n2(self):
        res = hyqmom_close(gaussian_standardized_moments(4))
        _, r, _ = assemble_characteristic(res.rc)
        np.testing.assert_allclose(r, [0, -6, 0, 1], atol=1e-13)

    def test_gaussian_n3(self):
        # R_4 = X Q_3 - beta_3 Q_2 with beta_3 = (7/3) b_3 = 7 at the
        # Gaussian point: X^4 - 10 X^2 + 7 (cross-checked below against the
        # finite-difference Jacobian spectrum)
        res = hyqmom_close(gaussian_standardized_moments(6))
        _, r, _ = assemble_characteristic(res.rc)
        np.testing.assert_allclose(r, [7, 0, -10, 0, 1], atol=1e-13)
        assert verify_factorization_fd(gaussian_standardized_moments(6)) < 1e-9

    def test_product_matches_roots(self):
        rng = np.random.default_rng(9)
        for _ in range(30):
            n = int(rng.integers(1, 8))
            m = random_kinetic_moments(rng, n)
            res = hyqmom_close(m, on_boundary="raise")
            q, r, p = assemble_characteristic(res.rc)
            from hyqmom.orthopoly import polynomial_eval

            assert np.max(np.abs(polynomial_eval(q, res.eigenvalues_q))) < 1e-8 * max(
                1.0, np.max(np.abs(q))
            )
            assert np.max(np.abs(polynomial_eval(r, res.eigenvalues_r))) < 1e-8 * max(
                1.0, np.max(np.abs(r))
            )


class TestConstraints:
    def test_closure_satisfies_constraints(self):
        rng = np.random.default_rng(10)
        for _ in range(100):
            n = int(rng.integers(1, 11))
            smom = random_kinetic_moments(rng, n)
            res = hyqmom_close(smom, on_boundary="raise", with_eigen=False)
            closed = np.concatenate((smom, [res.m_next]))
            _, _, p = assemble_characteristic(res.rc)
            triple = check_constraints(closed, p)
            qn_sq = float(np.prod(res.rc.b[: n + 1]))
            assert max(abs(v) for v in triple) < 1e-9 * qn_sq

    def test_x_on_centered_state(self):
        triple = check_constraints(np.array([1.0, 0.0, 1.0]), np.array([0.0, 1.0]))
        assert triple[0] == 0.0

    def test_perturbed_alpha_detected(self):
        # with the closed moment fixed, <P> = (a_n - alpha) <Q_n^2> exactly
        rng = np.random.default_rng(11)
        for _ in range(30):
            n = int(rng.integers(1, 7))
            smom = random_kinetic_moments(rng, n)
            res = hyqmom_close(smom, on_boundary="raise", with_eigen=False)
            closed = np.concatenate((smom, [res.m_next]))
            delta = float(rng.uniform(0.1, 1.0))
            _, _, p_bad = assemble_characteristic(res.rc, alpha=res.alpha + delta)
            triple = check_constraints(closed, p_bad)
            qn_sq = float(np.prod(res.rc.b[: n + 1]))
            assert triple[0] == pytest.approx(-delta * qn_sq, rel=1e-7)


class TestInterlacing:
    def test_random_interior(self):
        rng = np.random.default_rng(12)
        for _ in range(200):
            n = int(rng.integers(1, 11))
            m = random_interior_moments(rng, n)
            res = hyqmom_close(m, on_boundary="raise")
            assert res.interlaced
            assert interlacing_check(res)
            assert res.eigenvalues_q.size + res.eigenvalues_r.size == 2 * n + 1

    def test_boundary_limit_shares_roots(self):
        # as beta_n -> 0 the outer roots collapse onto the roots of Q_n
        s3 = -1.0
        tiny = 1e-13
        m = np.array([1.0, 0.0, 1.0, s3, 1.0 + s3**2 + tiny])
        res = hyqmom_close(m)
        q_roots = np.sort(res.eigenvalues_q)
        r_roots = np.sort(res.eigenvalues_r)
        assert interlacing_check(res)  # non-strict mode kicks in at beta ~ 0
        # two of the three roots of R_3 coincide with the roots of Q_2
        np.testing.assert_allclose(
            [r_roots[0], r_roots[2]], q_roots, atol=1e-5
        )

    def test_fig_style_sweep_n2(self):
        # roots of Q_2 stay fixed while the R_3 fan opens with H_4
        s3 = -1.0
        expect_q = np.sort([0.5 * (s3 - np.sqrt(4 + s3**2)), 0.5 * (s3 + np.sqrt(4 + s3**2))])
        prev_outer = 0.0
        for h4 in [0.25, 0.5, 1.0, 2.0, 4.0]:
            m = np.array([1.0, 0.0, 1.0, s3, 1.0 + s3**2 + h4])
            res = hyqmom_close(m)
            np.testing.assert_allclose(res.eigenvalues_q, expect_q, rtol=1e-12)
            outer = res.eigenvalues_r[-1] - res.eigenvalues_r[0]
            assert outer > prev_outer
            prev_outer = outer


class TestFdJacobian:
    def test_n1(self):
        assert verify_factorization_fd(np.array([1.0, 0.0, 1.0])) < 1e-9

    def test_n2_gaussian_spectrum(self):
        m = gaussian_standardized_moments(4)
        res = hyqmom_close(m)
        np.testing.assert_allclose(res.eigenvalues_q, [-1, 1], rtol=1e-12)
        np.testing.assert_allclose(
            res.eigenvalues_r, [-np.sqrt(6), 0, np.sqrt(6)], rtol=1e-12, atol=1e-12
        )
        assert verify_factorization_fd(m) < 1e-8

    def test_random_interior_n_le_5(self):
        rng = np.random.default_rng(13)
        for _ in range(30):
            n = int(rng.integers(1, 6))
            m = random_kinetic_moments(rng, n)
            assert verify_factorization_fd(m) < 1e-5
