import numpy as np
import pytest

from lbcnnm.convolution import SamplingMask, conv_matrix, numerical_rank
from lbcnnm.solvers import (
    AdmmConfig,
    FORECAST_CONFIG,
    cpcp,
    lbcnnm_solve,
    orthonormal_fit_l1,
    orthonormal_fit_l2,
    pcp,
    sign_fixed_svd,
    soft_threshold,
    svt,
)

rng = np.random.default_rng(17)


def random_orthonormal(q, m, seed):
    return np.linalg.qr(np.random.default_rng(seed).standard_normal((q, m)))[0]


class TestSoftThreshold:
    def test_basic(self):
        assert soft_threshold(np.array([3.0, -1.0]), 1.0).tolist() == [2.0, 0.0]

    def test_tau_zero_identity(self):
        Z = rng.standard_normal((3, 4))
        assert np.array_equal(soft_threshold(Z, 0.0), Z)

    def test_negative_tau_rejected(self):
        with pytest.raises(ValueError):
            soft_threshold(np.ones(2), -0.5)

    def test_minimizes_l1_prox_objective(self):
        # brute force over a value grid, entry by entry
        Z = np.array([[0.8, -2.3], [1.4, 0.1]])
        tau = 0.6
        X = soft_threshold(Z, tau)

        def objective(M):
            return tau * np.abs(M).sum() + 0.5 * np.sum((M - Z) ** 2)

        grid = np.linspace(-3, 3, 2401)
        for i in range(2):
            for j in range(2):
                vals = tau * np.abs(grid) + 0.5 * (grid - Z[i, j]) ** 2
                assert abs(grid[np.argmin(vals)] - X[i, j]) < 5e-3
        assert objective(X) <= objective(Z) + 1e-12


class TestSvt:
    def test_tau_zero(self):
        Z = rng.standard_normal((4, 3))
        assert np.allclose(svt(Z, 0.0), Z, atol=1e-12)

    def test_large_tau_zeroes(self):
        Z = rng.standard_normal((4, 4))
        tau = np.linalg.svd(Z, compute_uv=False)[0] + 1.0
        assert np.max(np.abs(svt(Z, tau))) == 0.0

    def test_minimizes_nuclear_prox_objective(self):
        # oracle: scalar search per singular value of the prox objective
        Z = rng.standard_normal((3, 3))
        tau = 0.7
        X = svt(Z, tau)
        U, s, Vt = np.linalg.svd(Z, full_matrices=False)
        grid = np.linspace(0, s[0] + 1, 4001)
        t_star = [grid[np.argmin(tau * grid + 0.5 * (grid - si) ** 2)] for si in s]
        X_ref = (U * t_star) @ Vt
        assert np.max(np.abs(X - X_ref)) < 2e-3

        def objective(M):
            return tau * np.linalg.svd(M, compute_uv=False).sum() + 0.5 * np.sum((M - Z) ** 2)

        for _ in range(25):
            P = rng.standard_normal((3, 3)) * 0.05
            assert objective(X) <= objective(X + P) + 1e-9


class TestSignFixedSvd:
    def test_reconstruction_and_signs(self):
        M = rng.standard_normal((6, 4))
        U, s, Vt = sign_fixed_svd(M)
        assert np.allclose((U * s) @ Vt, M, atol=1e-10)
        peaks = np.argmax(np.abs(U), axis=0)
        assert np.all(U[peaks, np.arange(U.shape[1])] > 0)

    def test_full_matrices(self):
        M = rng.standard_normal((6, 2))
        U, s, Vt = sign_fixed_svd(M, full_matrices=True)
        assert U.shape == (6, 6)
        assert np.allclose(U.T @ U, np.eye(6), atol=1e-10)


class TestPcp:
    def planted(self, m=40, n=60, rank=2, frac=0.05, mag=10.0, seed=3):
        g = np.random.default_rng(seed)
        L0 = g.standard_normal((m, rank)) @ g.standard_normal((rank, n))
        S0 = np.zeros((m, n))
        idx = g.choice(m * n, int(frac * m * n), replace=False)
        S0.flat[idx] = mag * np.std(L0) * g.choice([-1.0, 1.0], idx.size)
        return L0, S0

    def test_low_rank_only(self):
        L0, _ = self.planted(frac=0.0)
        res = pcp(L0, 1 / np.sqrt(60))
        assert res.converged
        assert np.linalg.norm(res.S) / np.linalg.norm(L0) < 1e-4
        assert np.linalg.norm(res.L - L0) / np.linalg.norm(L0) < 1e-4

    def test_planted_recovery(self):
        L0, S0 = self.planted()
        Y = L0 + S0
        res = pcp(Y, 1 / np.sqrt(60))
        assert res.converged
        assert np.linalg.norm(res.L - L0) / np.linalg.norm(L0) < 1e-3
        assert np.linalg.norm(res.S - S0) / np.linalg.norm(S0) < 1e-3
        # primal residual of the returned split sits below the stopping tolerance
        assert np.linalg.norm(Y - res.L - res.S) / np.linalg.norm(Y) <= 1e-7

    def test_zero_matrix(self):
        res = pcp(np.zeros((3, 3)))
        assert np.max(np.abs(res.L)) == 0.0
        assert np.max(np.abs(res.S)) == 0.0

    def test_objective_sanity_bounds(self):
        Y = rng.standard_normal((10, 14))
        lam = 1 / np.sqrt(14)
        res = pcp(Y, lam)

        def objective(L, S):
            return np.linalg.svd(L, compute_uv=False).sum() + lam * np.abs(S).sum()

        assert objective(res.L, res.S) <= objective(Y, np.zeros_like(Y)) + 1e-6
        assert objective(res.L, res.S) <= objective(np.zeros_like(Y), Y) + 1e-6

    def test_default_lambda(self):
        L0, S0 = self.planted()
        res = pcp(L0 + S0)  # lam defaults to 1/sqrt(max(m, n))
        assert np.linalg.norm(res.L - L0) / np.linalg.norm(L0) < 1e-3


class TestCpcp:
    def test_full_observation_matches_pcp(self):
        Y = rng.standard_normal((12, 15)) + np.outer(np.ones(12), rng.standard_normal(15))
        full = np.ones(Y.shape, dtype=bool)
        a = pcp(Y)
        b = cpcp(Y, full)
        assert np.linalg.norm(a.L - b.L) / max(np.linalg.norm(a.L), 1e-9) < 1e-5

    def test_heldout_completion(self):
        g = np.random.default_rng(8)
        L0 = g.standard_normal((20, 2)) @ g.standard_normal((2, 30))
        obs = g.random(L0.shape) < 0.9
        res = cpcp(L0, obs)
        hidden = ~obs
        err = np.linalg.norm((res.L - L0)[hidden]) / np.linalg.norm(L0[hidden])
        assert err < 1e-2

    def test_single_entry_feasibility(self):
        Y = np.zeros((4, 4))
        Y[1, 2] = 5.0
        obs = np.zeros((4, 4), dtype=bool)
        obs[1, 2] = True
        res = cpcp(Y, obs)
        assert abs((res.L + res.S)[1, 2] - 5.0) < 1e-4

    def test_index_pair_input(self):
        Y = np.arange(12, dtype=float).reshape(3, 4) + 1
        pairs = np.array([[i, j] for i in range(3) for j in range(4)])
        res = cpcp(Y, pairs)
        assert np.linalg.norm(Y - res.L - res.S) / np.linalg.norm(Y) < 1e-5

    def test_empty_observed_rejected(self):
        with pytest.raises(ValueError):
            cpcp(np.ones((3, 3)), np.zeros((3, 3), dtype=bool))


class TestOrthonormalFits:
    def planted(self, m=8, n=20, seed=4):
        g = np.random.default_rng(seed)
        Y = g.standard_normal((m, n))
        B0 = random_orthonormal(2 * m, m, seed + 1)
        return Y, B0, B0 @ Y

    def test_l2_exact_on_planted(self):
        Y, B0, E = self.planted()
        B = orthonormal_fit_l2(Y, E)
        assert np.max(np.abs(B @ Y - E)) < 1e-9
        assert np.max(np.abs(B.T @ B - np.eye(Y.shape[0]))) < 1e-10

    def test_l2_polar_factor(self):
        m = 5
        E = rng.standard_normal((2 * m, m))
        B = orthonormal_fit_l2(np.eye(m), E)
        # Procrustes against the identity is the polar factor of E
        U, _, Vt = np.linalg.svd(E, full_matrices=False)
        assert np.max(np.abs(B - U @ Vt)) < 1e-10

    def test_l2_beats_random_candidates(self):
        Y = rng.standard_normal((6, 14))
        E = rng.standard_normal((12, 14))
        B = orthonormal_fit_l2(Y, E)
        best = np.linalg.norm(B @ Y - E)
        for i in range(100):
            Bp = random_orthonormal(12, 6, seed=100 + i)
            assert best <= np.linalg.norm(Bp @ Y - E) + 1e-9

    def test_l1_planted_objective(self):
        Y, B0, E = self.planted()
        B, info = orthonormal_fit_l1(Y, E, return_info=True)
        assert info.converged
        assert np.abs(B @ Y - E).sum() < 1e-5 * np.abs(E).sum()
        assert np.max(np.abs(B.T @ B - np.eye(Y.shape[0]))) < 1e-8

    def test_first_iterate_is_l2_solution(self):
        Y = rng.standard_normal((7, 18))
        E = rng.standard_normal((14, 18))
        one_step = orthonormal_fit_l1(Y, E, cfg=AdmmConfig(max_iters=1, tol=1e-30))
        assert np.array_equal(one_step, orthonormal_fit_l2(Y, E))

    def test_empty_problem_rejected(self):
        with pytest.raises(ValueError):
            orthonormal_fit_l1(np.zeros((4, 0)), np.zeros((8, 0)))

    def test_rank_deficient_is_deterministic(self):
        Y = np.outer(np.ones(5), rng.standard_normal(9))  # rank 1
        E = rng.standard_normal((10, 9))
        B1 = orthonormal_fit_l2(Y, E)
        B2 = orthonormal_fit_l2(Y.copy(), E.copy())
        assert np.array_equal(B1, B2)
        assert np.max(np.abs(B1.T @ B1 - np.eye(5))) < 1e-8


def periodic_instance(p=8, c=4, seed=0):
    g = np.random.default_rng(seed)
    base = g.standard_normal(p)
    y = np.tile(base, c) + 12.0
    m = c * p
    h = p // 2
    mask = SamplingMask.observed_prefix(m, m - h)
    observed = np.where(mask.to_bool(), y, 0.0)
    return y, observed, mask, m, h


class TestLbcnnmSolve:
    def test_all_observed_returns_data(self):
        m = 16
        y = rng.standard_normal(m) + 10
        mask = SamplingMask.observed_prefix(m, m)
        x = lbcnnm_solve(y, mask, np.eye(m), k=8, lam=1e6)
        assert np.linalg.norm(x - y) / np.linalg.norm(y) < 1e-4

    def test_periodic_exact_recovery(self):
        y, observed, mask, m, h = periodic_instance()
        x = lbcnnm_solve(observed, mask, np.eye(m), k=m // 2)
        err = np.linalg.norm(x[m - h:] - y[m - h:]) / np.linalg.norm(y[m - h:])
        assert err < 1e-3

    def test_fft_path_matches_direct(self):
        for seed in range(20):
            g = np.random.default_rng(seed)
            m = 10
            A = random_orthonormal(2 * m, m, seed)
            y = g.standard_normal(m) * 2 + 10
            keep = np.ones(m, dtype=bool)
            keep[g.choice(m, 3, replace=False)] = False
            y_obs = np.where(keep, y, 0.0)
            xd = lbcnnm_solve(y_obs, keep, A, k=2 * m, use_fft=False)
            xf = lbcnnm_solve(y_obs, keep, A, k=2 * m, use_fft=True)
            assert np.max(np.abs(xd - xf)) < 1e-8

    def test_fft_path_requires_full_kernel(self):
        with pytest.raises(ValueError):
            lbcnnm_solve(np.ones(4), np.ones(4, bool), np.eye(4), k=2, use_fft=True)

    def test_fidelity_monotone_in_lambda(self):
        y, observed, mask, m, h = periodic_instance(seed=2)
        noisy = observed + np.where(mask.to_bool(), 0.05 * rng.standard_normal(m), 0.0)
        fidelities = []
        for lam in (10.0, 1000.0, 1e5):
            x = lbcnnm_solve(noisy, mask, np.eye(m), k=m // 2, lam=lam)
            fidelities.append(np.linalg.norm((x - noisy)[mask.to_bool()]))
        assert fidelities[0] >= fidelities[1] - 1e-9
        assert fidelities[1] >= fidelities[2] - 1e-9

    def test_residual_below_tol_at_convergence(self):
        y, observed, mask, m, h = periodic_instance(seed=3)
        x, info = lbcnnm_solve(observed, mask, np.eye(m), k=m // 2, return_info=True)
        assert info.converged
        assert info.residual <= FORECAST_CONFIG.tol

    def test_nonconvergence_flagged(self):
        y, observed, mask, m, h = periodic_instance(seed=4)
        cfg = AdmmConfig(max_iters=3, tol=1e-12, rho_growth=1.05)
        with pytest.warns(RuntimeWarning):
            x, info = lbcnnm_solve(observed, mask, np.eye(m), k=m // 2,
                                   cfg=cfg, return_info=True)
        assert not info.converged
        assert x.shape == (m,)

    def test_kernel_bounds_checked(self):
        with pytest.raises(ValueError):
            lbcnnm_solve(np.ones(4), np.ones(4, bool), np.eye(4), k=0)
        with pytest.raises(ValueError):
            lbcnnm_solve(np.ones(4), np.ones(4, bool), np.eye(4), k=5)


def test_periodic_conv_rank_stays_bounded():
    y, observed, mask, m, h = periodic_instance(p=6, c=4, seed=7)
    x = lbcnnm_solve(observed, mask, np.eye(m), k=m)
    assert numerical_rank(conv_matrix(x, m)) <= 6 + 1
