"""Infinite-horizon preview controller, noncausal limit, and cost results.

With ``P`` the stabilizing DARE solution and ``H = R + Bu^T P Bu``:

    Kx = H^{-1} Bu^T P A,   Kw = H^{-1} Bu^T P Bw,   Kv = H^{-1} Bu^T
    u[t] = -Kx x[t] - Kw w[t] - Kv v[t+1]
    v[t+1] = sum_{j=t+1}^{t+p} (Ahat^T)^{j-t} P Bw w[j],   Ahat = A - Bu Kx

The optimal average cost is
``tr(P Bw Bw^T) - sum_{j=0}^{p} tr(H Kv (Ahat^T)^j P Bw Bw^T P Ahat^j Kv^T)``.
Letting ``p -> inf`` gives the noncausal controller, whose cost is
``tr(P Bw Bw^T) - tr(H Kv X Kv^T)`` with ``Ahat^T X Ahat - X + P Bw Bw^T P = 0``.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionError
from .model import validate_lti
from .riccati import DareSolution, pd_solve, solve_dare, solve_dlyap
from .validation import as_vector, frozen


@dataclass(frozen=True)
class IhSynthesis:
    dare: DareSolution
    Kx: np.ndarray
    Kw: np.ndarray
    Kv: np.ndarray
    Ahat: np.ndarray
    preview: int
    Bu: np.ndarray
    Bw: np.ndarray
    # ff_table[k] = (Ahat^T)^(k+1) P Bw for k = 0..p-1
    ff_table: np.ndarray

    @property
    def P(self):
        return self.dare.P

    @property
    def H(self):
        return self.dare.H

    @property
    def PBw(self):
        return self.dare.P @ self.Bw

    @property
    def n_x(self):
        return self.Kx.shape[1]

    def preview_gains(self):
        """Blocks ``G_0..G_p`` with ``u = -Kx x - sum_j G_j w[t+j]``."""
        return np.concatenate([self.Kw[None],
                               np.einsum("uv,kvw->kuw", self.Kv, self.ff_table)])


@dataclass(frozen=True)
class NcSynthesis:
    ih: IhSynthesis
    X: np.ndarray
    Y: np.ndarray

    @property
    def Kx(self):
        return self.ih.Kx

    @property
    def Kw(self):
        return self.ih.Kw

    @property
    def Kv(self):
        return self.ih.Kv

    @property
    def Ahat(self):
        return self.ih.Ahat


def ih_synthesize(sys, cost, preview=0, check=True, tol=1e-10, max_iter=200):
    if preview < 0:
        raise DimensionError("preview must be nonnegative")
    if check:
        validate_lti(sys, cost).raise_if_failed()
    sol = solve_dare(sys, cost, tol=tol, max_iter=max_iter)
    return gains_from_dare(sys, sol, preview)


def gains_from_dare(sys, sol, preview):
    """Preview gains for a given DARE solution (no further checks)."""
    P = sol.P
    n, nw = sys.n_x, sys.n_w
    gains = pd_solve(sol.H, np.hstack([sys.Bu.T @ P @ sys.A, sys.Bu.T @ P @ sys.Bw, sys.Bu.T]))
    Kx, Kw, Kv = gains[:, :n], gains[:, n:n + nw], gains[:, n + nw:]
    Ahat = sys.A - sys.Bu @ Kx
    table = np.empty((preview, n, nw))
    M = P @ sys.Bw
    for k in range(preview):
        M = Ahat.T @ M
        table[k] = M
    return IhSynthesis(sol, frozen(Kx), frozen(Kw), frozen(Kv), frozen(Ahat), int(preview),
                       sys.Bu, sys.Bw, frozen(table))


def _check_window(synth, window, t):
    if t is not None and window.start != t:
        raise DimensionError(f"window starts at {window.start}, expected t={t}")
    if window.preview is not None and window.preview < synth.preview:
        raise DimensionError(
            f"window preview {window.preview} shorter than controller preview {synth.preview}"
        )


def ih_feedforward(synth, window, t=None):
    """``v[t+1]`` from the previewed disturbances ``w[t+1..t+p]``."""
    _check_window(synth, window, t)
    t = window.start
    v = np.zeros(synth.n_x)
    for k in range(synth.preview):
        v += synth.ff_table[k] @ window[t + 1 + k]
    return v


def ih_control(synth, x, window, t=None):
    x = as_vector(x, "x", synth.n_x)
    v = ih_feedforward(synth, window, t)
    return -synth.Kx @ x - synth.Kw @ window[window.start] - synth.Kv @ v


def lqr_cost(synth):
    """Average cost of plain state feedback ``u = -Kx x``: ``tr(P Bw Bw^T)``."""
    return float(np.trace(synth.P @ synth.Bw @ synth.Bw.T))


def ih_optimal_cost(synth, preview=None):
    """Optimal average per-step cost with ``preview`` steps (defaults to the
    synthesis preview), summed term by term."""
    p = synth.preview if preview is None else preview
    HKv = synth.H @ synth.Kv
    reduction = 0.0
    M = synth.PBw
    for j in range(p + 1):
        if j:
            M = synth.Ahat.T @ M
        reduction += np.trace(HKv @ M @ M.T @ synth.Kv.T)
    return lqr_cost(synth) - float(reduction)


def nc_synthesize(sys, cost, check=True, tol=1e-10):
    ih = ih_synthesize(sys, cost, 0, check=check, tol=tol)
    PBw = ih.PBw
    X = solve_dlyap(ih.Ahat, PBw @ PBw.T, tol=tol)
    Y = ih.Kv.T @ ih.H @ ih.Kv
    return NcSynthesis(ih, frozen(X), frozen(0.5 * (Y + Y.T)))


def _gains(synth):
    return synth.ih if isinstance(synth, NcSynthesis) else synth


def nc_feedforward_all(synth, w_seq):
    """``v^nc[t]`` for ``t = 0..N`` by the anticausal recursion
    ``v[t] = Ahat^T (v[t+1] + P Bw w[t])`` from ``v[N] = 0``.

    ``w_seq`` has shape ``(N, n_w)``; disturbances past its end are zero.
    """
    g = _gains(synth)
    w_seq = np.atleast_2d(np.asarray(w_seq, dtype=float))
    N = w_seq.shape[0]
    v = np.zeros((N + 1, g.n_x))
    PBw, AhT = g.PBw, g.Ahat.T
    for t in range(N - 1, -1, -1):
        v[t] = AhT @ (v[t + 1] + PBw @ w_seq[t])
    return v


def nc_feedforward(synth, w_seq, t):
    """``v^nc[t+1]`` for the disturbance record ``w_seq`` (indices from 0)."""
    g = _gains(synth)
    w_seq = np.atleast_2d(np.asarray(w_seq, dtype=float))
    v = np.zeros(g.n_x)
    PBw, AhT = g.PBw, g.Ahat.T
    for j in range(w_seq.shape[0] - 1, t, -1):
        v = AhT @ (v + PBw @ w_seq[j])
    return v


def nc_feedforward_sum(synth, w_seq, t):
    """Explicit series ``sum_{j>t} (Ahat^T)^{j-t} P Bw w[j]`` (cross-check)."""
    g = _gains(synth)
    w_seq = np.atleast_2d(np.asarray(w_seq, dtype=float))
    v = np.zeros(g.n_x)
    for j in range(t + 1, w_seq.shape[0]):
        v += np.linalg.matrix_power(g.Ahat.T, j - t) @ g.PBw @ w_seq[j]
    return v


def nc_control(synth, x, w_seq, t):
    g = _gains(synth)
    x = as_vector(x, "x", g.n_x)
    w_seq = np.atleast_2d(np.asarray(w_seq, dtype=float))
    wt = w_seq[t] if t < w_seq.shape[0] else np.zeros(g.Kw.shape[1])
    return -g.Kx @ x - g.Kw @ wt - g.Kv @ nc_feedforward(g, w_seq, t)


def nc_cost(ncs):
    return lqr_cost(ncs.ih) - float(np.trace(ncs.ih.H @ ncs.Kv @ ncs.X @ ncs.Kv.T))


def psd_sqrt(M):
    """Symmetric square root with negative round-off eigenvalues clamped."""
    lam, V = np.linalg.eigh(0.5 * (M + M.T))
    return (V * np.sqrt(np.clip(lam, 0.0, None))) @ V.T


@dataclass(frozen=True)
class CostGap:
    gap: float
    lower_bound: float
    upper_bound: float


def cost_gap(ncs, preview):
    """``J_p - J_nc = tr(Y (Ahat^T)^{p+1} X Ahat^{p+1})`` with Frobenius bounds."""
    Ap = np.linalg.matrix_power(ncs.Ahat, preview + 1)
    gap = float(np.trace(ncs.Y @ Ap.T @ ncs.X @ Ap))
    Xh, Yh = psd_sqrt(ncs.X), psd_sqrt(ncs.Y)
    a = np.linalg.norm(Ap, "fro") ** 2
    lam_x = max(np.linalg.eigvalsh(Xh)[0], 0.0)
    lam_y = max(np.linalg.eigvalsh(Yh)[0], 0.0)
    lower = lam_x ** 2 * lam_y ** 2 * a
    upper = np.linalg.norm(Xh, "fro") ** 2 * np.linalg.norm(Yh, "fro") ** 2 * a
    return CostGap(gap, float(lower), float(upper))


@dataclass(frozen=True)
class ConvergenceConstants:
    """Constants of the uniform bound ``|u_nc - u_p| <= a_p b (c1 + c2 c3)``.

    Operator norms are spectral norms.
    """

    a_p: float
    b: float
    c1: float
    c2: float
    c3: float

    @property
    def bound(self):
        return self.a_p * self.b * (self.c1 + self.c2 * self.c3)


def convergence_constants(synth, w_seq, preview, tail_tol=1e-16):
    g = _gains(synth)
    n = g.n_x
    AhT = g.Ahat.T
    # sum_{l>=p+1} (Ahat^T)^l = (I - Ahat^T)^{-1} (Ahat^T)^{p+1}
    tail = np.linalg.solve(np.eye(n) - AhT, np.linalg.matrix_power(AhT, preview + 1))
    a_p = np.linalg.norm(tail @ g.PBw, 2)
    b = float(np.max(np.linalg.norm(np.atleast_2d(w_seq), axis=1)))
    c1 = np.linalg.norm(g.Kv, 2)
    c2 = np.linalg.norm(g.Kx, 2) * np.linalg.norm(g.Bu @ g.Kv, 2)
    c3, M = 0.0, np.eye(n)
    for _ in range(100000):
        term = np.linalg.norm(M, 2)
        c3 += term
        if term <= tail_tol * c3:
            break
        M = g.Ahat @ M
    return ConvergenceConstants(float(a_p), b, float(c1), float(c2), float(c3))
