import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from conftest import random_ltv, scalar_dare_root
from previewlqr.exceptions import NumericalError
from previewlqr.model import CostSchedule, CostWeights, LtiSystem, LtvSystem
from previewlqr.oracle import random_system
from previewlqr.riccati import dare, dare_residual, fh_riccati, pd_solve, solve_dare, solve_dlyap
from previewlqr.validation import spectral_radius


def scalar_ltv(a, b, q, r, qT, T):
    sys = LtvSystem([[[a]]] * T, [[[b]]] * T, [[[1.0]]] * T)
    cost = CostSchedule([[[q]]] * T + [[[qT]]], [[[r]]] * T)
    return sys, cost


class TestFhRiccati:
    def test_one_step_by_hand(self):
        res = fh_riccati(*scalar_ltv(1.0, 1.0, 1.0, 1.0, 1.0, 1))
        assert res.P_seq[1, 0, 0] == 1.0
        assert res.H_seq[0, 0, 0] == pytest.approx(2.0)
        assert res.P_seq[0, 0, 0] == pytest.approx(1.5)

    def test_zero_weights_propagate(self):
        rng = np.random.default_rng(0)
        sys, cost = random_ltv(rng, T=6, n_x=3, n_u=2)
        zero = CostSchedule(np.zeros_like(cost.Q_seq), cost.R_seq)
        res = fh_riccati(sys, zero)
        assert np.all(res.P_seq == 0)
        assert np.allclose(res.H_seq, cost.R_seq)

    def test_no_input(self):
        res = fh_riccati(*scalar_ltv(0.5, 0.0, 1.0, 1.0, 1.0, 2))
        assert np.allclose(res.P_seq[:, 0, 0], [1.3125, 1.25, 1.0])

    def test_converges_to_dare(self, boeing):
        sys, cost = boeing
        P = solve_dare(sys, cost).P
        diffs = []
        for T in (50, 100, 200, 400, 800):
            P0 = fh_riccati(LtvSystem.constant(sys, T), CostSchedule.constant(cost, T)).P_seq[0]
            diffs.append(np.linalg.norm(P0 - P))
        assert all(b < a for a, b in zip(diffs, diffs[1:]))
        assert diffs[-1] < 1e-10

    def test_definiteness_invariants_random(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            sys, cost = random_ltv(rng)
            res = fh_riccati(sys, cost)
            for P in res.P_seq:
                assert np.linalg.eigvalsh(P)[0] >= -1e-10 * max(np.linalg.norm(P, 2), 1e-300)
            for H, R in zip(res.H_seq, cost.R_seq):
                assert np.linalg.eigvalsh(H)[0] >= np.linalg.eigvalsh(R)[0] - 1e-12

    def test_failure_names_time_index(self):
        sys, cost = scalar_ltv(1.0, 1.0, 1.0, 1.0, 1.0, 3)
        R = np.array(cost.R_seq)
        R[1] = -5.0
        with pytest.raises(NumericalError, match="t=1"):
            fh_riccati(sys, CostSchedule(cost.Q_seq, R))


class TestDare:
    def test_scalar_closed_form(self, scalar):
        sol = solve_dare(*scalar)
        assert sol.P[0, 0] == pytest.approx(scalar_dare_root(), abs=1e-12)
        # cross-check: iterate the finite-horizon recursion to a fixed point
        P = 0.0
        for _ in range(1000):
            P_next = 1 + 0.25 * P - (0.5 * P) ** 2 / (1 + P)
            if abs(P_next - P) < 1e-12:
                break
            P = P_next
        assert sol.P[0, 0] == pytest.approx(P_next, abs=1e-10)

    def test_zero_weight_schur(self):
        sys = LtiSystem(np.diag([0.5, -0.3]), np.eye(2), np.eye(2))
        sol = solve_dare(sys, CostWeights(np.zeros((2, 2)), np.eye(2)))
        assert np.allclose(sol.P, 0)

    def test_boeing_trace(self, boeing):
        sys, cost = boeing
        sol = solve_dare(sys, cost)
        assert np.trace(sol.P @ sys.Bw @ sys.Bw.T) == pytest.approx(33.2, rel=0.05)
        assert sol.residual <= 1e-10
        assert sol.spectral_radius_closed_loop < 1
        assert sol.method == "doubling"

    def test_matches_scipy(self, boeing):
        sys, cost = boeing
        ref = scipy.linalg.solve_discrete_are(sys.A, sys.Bu, cost.Q, cost.R)
        assert np.allclose(solve_dare(sys, cost).P, ref, rtol=1e-9, atol=1e-9)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 10_000), n_x=st.integers(1, 5), n_u=st.integers(1, 3))
    def test_random_systems_against_scipy(self, seed, n_x, n_u):
        sys, cost = random_system(np.random.default_rng(seed), n_x, n_u, 1, radius=1.3)
        sol = solve_dare(sys, cost)
        ref = scipy.linalg.solve_discrete_are(sys.A, sys.Bu, cost.Q, cost.R)
        assert np.allclose(sol.P, ref, rtol=1e-7, atol=1e-8)
        assert dare_residual(sys.A, sys.Bu, cost.Q, cost.R, sol.P) <= 1e-10
        Kx = np.linalg.solve(sol.H, sys.Bu.T @ sol.P @ sys.A)
        assert spectral_radius(sys.A - sys.Bu @ Kx) < 1

    def test_singular_A_supported(self):
        A = np.array([[0.0, 1.0], [0.0, 0.0]])
        sol = dare(A, np.array([[0.0], [1.0]]), np.eye(2), np.eye(1))
        ref = scipy.linalg.solve_discrete_are(A, np.array([[0.0], [1.0]]), np.eye(2), np.eye(1))
        assert np.allclose(sol.P, ref)

    def test_unstabilizable_raises(self):
        with pytest.raises(NumericalError):
            dare(np.array([[2.0]]), np.array([[0.0]]), np.eye(1), np.eye(1), max_iter=20)


class TestDlyap:
    def test_zero_Ahat(self):
        W = np.array([[2.0, 1.0], [1.0, 3.0]])
        assert np.allclose(solve_dlyap(np.zeros((2, 2)), W), W)

    def test_scalar(self):
        assert solve_dlyap(np.array([[0.5]]), np.array([[1.0]]))[0, 0] == pytest.approx(4 / 3)

    def test_random_residual_and_partial_sums(self):
        rng = np.random.default_rng(4)
        A = rng.standard_normal((4, 4))
        A *= 0.9 / spectral_radius(A)
        X = solve_dlyap(A, np.eye(4))
        assert np.linalg.norm(A.T @ X @ A - X + np.eye(4)) <= 1e-10
        S, M = np.zeros((4, 4)), np.eye(4)
        while np.linalg.norm(M, 2) >= 1e-12:
            S += M.T @ M
            M = M @ A
        assert np.allclose(S, X, atol=1e-9)
        ref = scipy.linalg.solve_discrete_lyapunov(A.T, np.eye(4))
        assert np.allclose(X, ref, atol=1e-10)

    def test_doubling_branch_for_large_n(self):
        rng = np.random.default_rng(5)
        A = rng.standard_normal((40, 40))
        A *= 0.8 / spectral_radius(A)
        W = np.eye(40)
        X = solve_dlyap(A, W)
        assert np.linalg.norm(A.T @ X @ A - X + W) / np.linalg.norm(X) <= 1e-10

    def test_non_schur_raises(self):
        with pytest.raises(NumericalError):
            solve_dlyap(np.array([[1.0]]), np.array([[1.0]]))


def test_pd_solve_rejects_indefinite():
    with pytest.raises(NumericalError):
        pd_solve(np.diag([1.0, -1.0]), np.eye(2))
    with pytest.raises(NumericalError):
        pd_solve(np.diag([1.0, 1e-14]), np.eye(2))
