"""Finite-horizon stochastic LQR with ``p`` steps of disturbance preview.

The optimal policy is

    u[t] = -Kx[t] x[t] - Kw[t] w[t] - Kv[t] v[t+1]

with ``v[t+1] = sum_{j=t+1}^{t+p} Ahat[t+1]^T ... Ahat[j]^T P[j+1] Bw[j] w[j]``
and the convention ``w[j] = 0`` for ``j >= T``.  The optimal cost-to-go is
``x^T P[t] x + 2 vbar[t]^T x + q[t]``.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionError
from .model import validate_ltv
from .riccati import FhRiccati, fh_riccati, pd_solve
from .validation import as_vector, frozen


@dataclass(frozen=True)
class FhSynthesis:
    riccati: FhRiccati
    Kx_seq: np.ndarray
    Kw_seq: np.ndarray
    Kv_seq: np.ndarray
    Ahat_seq: np.ndarray
    preview: int
    Bw_seq: np.ndarray
    # ff_table[t][k] = Ahat[t+1]^T ... Ahat[t+1+k]^T P[t+2+k] Bw[t+1+k]
    ff_table: tuple

    @property
    def T(self):
        return self.Kx_seq.shape[0]

    @property
    def P_seq(self):
        return self.riccati.P_seq

    @property
    def H_seq(self):
        return self.riccati.H_seq


@dataclass(frozen=True)
class FhValueCoeffs:
    """Value-function coefficients conditioned on the initial information.

    ``vbar_seq[t]`` and ``q_seq[t]`` are expectations given ``i_0``; at
    ``t = 0`` they are exact, so ``J* = x0^T P0 x0 + 2 vbar0^T x0 + q0``.
    """

    P_seq: np.ndarray
    vbar_seq: np.ndarray
    q_seq: np.ndarray

    def cost(self, x0):
        x0 = np.asarray(x0, dtype=float)
        return float(x0 @ self.P_seq[0] @ x0 + 2 * self.vbar_seq[0] @ x0 + self.q_seq[0])


def fh_synthesize(sys, cost, preview, check=True):
    """Gain schedules of the optimal finite-horizon preview controller."""
    if preview < 0:
        raise DimensionError("preview must be nonnegative")
    if check:
        validate_ltv(sys, cost).raise_if_failed()
    ric = fh_riccati(sys, cost)
    T = sys.T
    Kx, Kw, Kv, Ahat = [], [], [], []
    for t in range(T):
        Bu, Pn = sys.Bu_seq[t], ric.P_seq[t + 1]
        gains = pd_solve(ric.H_seq[t], np.hstack([Bu.T @ Pn @ sys.A_seq[t],
                                                  Bu.T @ Pn @ sys.Bw_seq[t],
                                                  Bu.T]))
        n, nw = sys.n_x, sys.n_w
        Kx.append(gains[:, :n])
        Kw.append(gains[:, n:n + nw])
        Kv.append(gains[:, n + nw:])
        Ahat.append(sys.A_seq[t] - Bu @ Kx[-1])

    table = []
    for t in range(T):
        terms = []
        M = np.eye(sys.n_x)
        for j in range(t + 1, min(t + preview, T - 1) + 1):
            M = M @ Ahat[j].T
            terms.append(M @ ric.P_seq[j + 1] @ sys.Bw_seq[j])
        table.append(frozen(np.array(terms).reshape(len(terms), sys.n_x, sys.n_w)))

    return FhSynthesis(ric, frozen(Kx), frozen(Kw), frozen(Kv), frozen(Ahat),
                       int(preview), sys.Bw_seq, tuple(table))


def _check_window(synth, window, t):
    if not 0 <= t < synth.T:
        raise DimensionError(f"t={t} outside horizon 0..{synth.T - 1}")
    if window.start != t:
        raise DimensionError(f"window starts at {window.start}, expected t={t}")
    if window.preview is not None and window.preview < synth.preview:
        raise DimensionError(
            f"window preview {window.preview} shorter than controller preview {synth.preview}"
        )


def fh_feedforward(synth, window, t):
    """Preview term ``v[t+1]``; zero when ``p = 0`` or ``t = T-1``."""
    _check_window(synth, window, t)
    table = synth.ff_table[t]
    v = np.zeros(synth.Kx_seq.shape[2])
    for k in range(table.shape[0]):
        v += table[k] @ window[t + 1 + k]
    return v


def fh_control(synth, x, window, t):
    x = as_vector(x, "x", synth.Kx_seq.shape[2])
    v = fh_feedforward(synth, window, t)
    return -synth.Kx_seq[t] @ x - synth.Kw_seq[t] @ window[t] - synth.Kv_seq[t] @ v


def _expected_stage_remainder(synth, s, known_stop, w_known):
    """``E[c_s | i]`` where ``c_s`` is the disturbance-only part of ``q_s``.

    ``c_s = w_s^T Bw^T P Bw w_s + 2 v_{s+1}^T Bw w_s - |Kw w_s + Kv v_{s+1}|_H^2``.
    Disturbances with index below ``known_stop`` are taken from
    ``w_known`` (a callable), the rest are zero mean with identity
    covariance, so cross terms between distinct unknown indices vanish.
    """
    P_next = synth.P_seq[s + 1]
    Bw, H = synth.Bw_seq[s], synth.H_seq[s]
    Kw, Kv = synth.Kw_seq[s], synth.Kv_seq[s]
    table = synth.ff_table[s]
    S = Bw.T @ P_next @ Bw

    s_known = s < known_stop
    total = 0.0
    g_known = np.zeros(Kw.shape[0])
    if s_known:
        ws = w_known(s)
        total += ws @ S @ ws
        g_known += Kw @ ws
    else:
        total += np.trace(S)
        total -= np.sum(Kw * (H @ Kw))
    for k in range(table.shape[0]):
        j = s + 1 + k
        G = Kv @ table[k]
        if j < known_stop:
            wj = w_known(j)
            if s_known:
                total += 2 * wj @ table[k].T @ Bw @ ws
            g_known += G @ wj
        else:
            total -= np.sum(G * (H @ G))
    total -= g_known @ H @ g_known
    return total


def fh_value(synth, x, window, t):
    """Optimal expected cost-to-go ``V_t(i_t)`` for a realized information set."""
    _check_window(synth, window, t)
    x = as_vector(x, "x", synth.Kx_seq.shape[2])
    known_stop = min(t + synth.preview + 1, synth.T)
    vbar = synth.Ahat_seq[t].T @ (synth.P_seq[t + 1] @ synth.Bw_seq[t] @ window[t]
                                  + fh_feedforward(synth, window, t))
    q = sum(_expected_stage_remainder(synth, s, known_stop, window.__getitem__)
            for s in range(t, synth.T))
    return float(x @ synth.P_seq[t] @ x + 2 * vbar @ x + q)


def fh_value_coeffs(synth, window, x0=None):
    """Coefficients of the optimal cost given ``i_0`` and, if ``x0`` is
    supplied, the optimal expected cost ``J*_{T,p}(i_0)``.

    ``window`` holds the initially known disturbances ``w_0..w_p``.
    """
    _check_window(synth, window, 0)
    T, n = synth.T, synth.Kx_seq.shape[2]
    known_stop = min(synth.preview + 1, T)

    def w_known(j):
        return window[j]

    c = np.array([_expected_stage_remainder(synth, s, known_stop, w_known)
                  for s in range(T)])
    q_seq = np.append(np.cumsum(c[::-1])[::-1], 0.0)

    # E[vbar_t | i_0]: unknown disturbances have zero mean.
    vbar_seq = np.zeros((T + 1, n))
    for t in range(known_stop):
        acc = np.zeros(n)
        M = synth.Ahat_seq[t].T.copy()
        for j in range(t, min(t + synth.preview, T - 1) + 1):
            if j > t:
                M = M @ synth.Ahat_seq[j].T
            if j < known_stop:
                acc += M @ synth.P_seq[j + 1] @ synth.Bw_seq[j] @ window[j]
        vbar_seq[t] = acc
    coeffs = FhValueCoeffs(synth.P_seq, frozen(vbar_seq), frozen(q_seq))
    if x0 is None:
        return coeffs, None
    return coeffs, coeffs.cost(as_vector(x0, "x0", n))
