"""Riccati and Lyapunov solvers.

* :func:`fh_riccati` -- backward Riccati difference equation on a finite horizon.
* :func:`solve_dare` -- stabilizing DARE solution by structure-preserving
  doubling, with the fixed-point Riccati iteration as a fallback.
* :func:`solve_dlyap` -- ``Ahat^T X Ahat - X + W = 0`` for Schur ``Ahat``.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import NumericalError
from .validation import frozen, spectral_radius

COND_LIMIT = 1e12
KRONECKER_MAX_N = 32
DIVERGENCE_LIMIT = 1e100


@dataclass(frozen=True)
class FhRiccati:
    P_seq: np.ndarray  # (T+1, n_x, n_x)
    H_seq: np.ndarray  # (T, n_u, n_u)

    @property
    def T(self):
        return self.H_seq.shape[0]


@dataclass(frozen=True)
class DareSolution:
    P: np.ndarray
    H: np.ndarray
    residual: float
    spectral_radius_closed_loop: float
    iterations: int
    method: str


def pd_solve(H, rhs, name="H"):
    """Solve ``H X = rhs`` for symmetric positive definite ``H``.

    Raises :class:`NumericalError` when ``H`` is not numerically PD or its
    condition number exceeds ``COND_LIMIT``.
    """
    eig = np.linalg.eigvalsh(H)
    if eig[0] <= 0 or eig[-1] / eig[0] > COND_LIMIT:
        cond = np.inf if eig[0] <= 0 else eig[-1] / eig[0]
        raise NumericalError(f"{name} is singular or ill conditioned (cond={cond:.3g})")
    return scipy.linalg.cho_solve(scipy.linalg.cho_factor(H), rhs)


def _sym(M):
    return 0.5 * (M + M.T)


def fh_riccati(sys, cost):
    """Backward Riccati iteration ``P_T = Q_T``, ``P_t`` from ``P_{t+1}``.

    ``H_t = R_t + Bu_t^T P_{t+1} Bu_t`` is returned alongside ``P_t``.
    """
    T, n, m = sys.T, sys.n_x, sys.n_u
    P_seq = np.empty((T + 1, n, n))
    H_seq = np.empty((T, m, m))
    P_seq[T] = cost.QT
    for t in range(T - 1, -1, -1):
        A, Bu, Pn = sys.A_seq[t], sys.Bu_seq[t], P_seq[t + 1]
        H = _sym(cost.R_seq[t] + Bu.T @ Pn @ Bu)
        BPA = Bu.T @ Pn @ A
        try:
            HinvBPA = pd_solve(H, BPA, f"H_{t}")
        except NumericalError as exc:
            raise NumericalError(f"Riccati iteration failed at t={t}: {exc}") from None
        H_seq[t] = H
        P_seq[t] = _sym(cost.Q_seq[t] + A.T @ Pn @ A - BPA.T @ HinvBPA)
    return FhRiccati(frozen(P_seq), frozen(H_seq))


def dare_residual(A, B, Q, R, P):
    """Frobenius norm of the DARE residual, relative to ``max(||P||_F, 1)``."""
    H = R + B.T @ P @ B
    BPA = B.T @ P @ A
    res = P - A.T @ P @ A - Q + BPA.T @ np.linalg.solve(H, BPA)
    return np.linalg.norm(res) / max(np.linalg.norm(P), 1.0)


def _check_bounded(M, method, k):
    if not np.all(np.isfinite(M)) or np.abs(M).max() > DIVERGENCE_LIMIT:
        raise NumericalError(f"{method} diverged at iteration {k} "
                             "(no stabilizing solution?)")


def _sda(A, B, Q, R, tol, max_iter):
    n = A.shape[0]
    I = np.eye(n)
    Ak = A.copy()
    Gk = B @ np.linalg.solve(R, B.T)
    Hk = Q.copy()
    for k in range(1, max_iter + 1):
        W = I + Gk @ Hk
        WinvA = np.linalg.solve(W, Ak)
        WinvG = np.linalg.solve(W, Gk)
        H_next = _sym(Hk + Ak.T @ Hk @ WinvA)
        Gk = _sym(Gk + Ak @ WinvG @ Ak.T)
        Ak = Ak @ WinvA
        change = np.linalg.norm(H_next - Hk)
        Hk = H_next
        _check_bounded(Hk, "doubling", k)
        if change <= tol * max(np.linalg.norm(Hk), 1.0):
            return Hk, k
    raise NumericalError(f"doubling did not converge in {max_iter} iterations "
                         f"(last change {change:.3g})")


def _fixed_point(A, B, Q, R, tol, max_iter):
    P = Q.copy()
    for k in range(1, max_iter + 1):
        H = R + B.T @ P @ B
        BPA = B.T @ P @ A
        P_next = _sym(Q + A.T @ P @ A - BPA.T @ np.linalg.solve(H, BPA))
        change = np.linalg.norm(P_next - P)
        P = P_next
        _check_bounded(P, "Riccati iteration", k)
        if change <= tol * max(np.linalg.norm(P), 1.0):
            return P, k
    raise NumericalError(f"Riccati iteration did not converge in {max_iter} "
                         f"iterations (last change {change:.3g})")


def solve_dare(sys, cost, tol=1e-10, max_iter=200):
    """Stabilizing solution of ``P = A^T P A + Q - A^T P Bu H^{-1} Bu^T P A``.

    Doubling is tried first; if it fails to converge, or lands on a
    non-stabilizing or indefinite solution, the plain Riccati iteration
    is run with a larger iteration budget.
    """
    return dare(sys.A, sys.Bu, cost.Q, cost.R, tol=tol, max_iter=max_iter)


def dare(A, B, Q, R, tol=1e-10, max_iter=200):
    """Array-level version of :func:`solve_dare`; ``A`` may be singular."""
    attempts = []
    for method in ("doubling", "fixed-point"):
        try:
            if method == "doubling":
                P, iters = _sda(A, B, Q, R, tol * 1e-3, max_iter)
            else:
                P, iters = _fixed_point(A, B, Q, R, tol * 1e-3, 1000 * max_iter)
        except (NumericalError, np.linalg.LinAlgError) as exc:
            attempts.append(f"{method}: {exc}")
            continue
        sol = _finish(A, B, Q, R, P, iters, method, tol)
        if isinstance(sol, str):
            attempts.append(f"{method}: {sol}")
            continue
        return sol
    raise NumericalError("DARE solve failed; " + "; ".join(attempts))


def _finish(A, B, Q, R, P, iters, method, tol):
    scale = max(np.linalg.norm(P), 1.0)
    if np.linalg.eigvalsh(P)[0] < -tol * scale:
        return "solution lost positive semidefiniteness"
    H = _sym(R + B.T @ P @ B)
    BPA = B.T @ P @ A
    Kx = pd_solve(H, BPA, "H")
    rho = spectral_radius(A - B @ Kx)
    residual = dare_residual(A, B, Q, R, P)
    if residual > tol:
        return f"residual {residual:.3g} exceeds tolerance {tol:.3g}"
    if rho >= 1.0:
        return f"closed loop not Schur (spectral radius {rho:.6f})"
    return DareSolution(frozen(P), frozen(H), float(residual), rho, iters, method)


def solve_dlyap(Ahat, W, tol=1e-10):
    """Solve ``Ahat^T X Ahat - X + W = 0``; ``X = sum_j (Ahat^T)^j W Ahat^j``.

    Small problems (``n <= 32``) use the Kronecker-product linear system;
    larger ones use the doubling (iterated squaring) series.
    """
    Ahat = np.asarray(Ahat, dtype=float)
    W = _sym(np.asarray(W, dtype=float))
    n = Ahat.shape[0]
    rho = spectral_radius(Ahat)
    if rho >= 1.0:
        raise NumericalError(f"Lyapunov operator needs a Schur matrix (spectral radius {rho:.6f})")
    if n <= KRONECKER_MAX_N:
        L = np.eye(n * n) - np.kron(Ahat.T, Ahat.T)
        X = np.linalg.solve(L, W.reshape(-1)).reshape(n, n)
    else:
        X, Ak = W.copy(), Ahat.copy()
        for _ in range(200):
            step = Ak.T @ X @ Ak
            X = _sym(X + step)
            Ak = Ak @ Ak
            if np.linalg.norm(step) <= 1e-3 * tol * max(np.linalg.norm(X), 1.0):
                break
    X = _sym(X)
    res = np.linalg.norm(Ahat.T @ X @ Ahat - X + W) / max(np.linalg.norm(X), 1.0)
    if res > tol:
        raise NumericalError(f"Lyapunov residual {res:.3g} exceeds tolerance {tol:.3g}")
    return X
