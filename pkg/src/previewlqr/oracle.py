"""Independent checks of the preview controller.

Two routes that do not go through the closed-form preview gains:

* the classical delay-chain construction, where the previewed disturbances
  are stacked into the state and a standard LQR problem is solved;
* exact stationary cost of any linear preview policy via a Lyapunov
  equation, used for finite-difference optimality checks.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import NumericalError, OracleMismatch
from .model import CostWeights, LtiSystem, validate_lti
from .preview_ih import ih_synthesize
from .riccati import dare
from .validation import as_matrix, spectral_radius


@dataclass(frozen=True)
class AugmentedSystem:
    """State ``z[t] = [x[t]; w[t]; ...; w[t+p]]`` driven by ``w[t+p+1]``."""

    Abar: np.ndarray
    Bubar: np.ndarray
    Bwbar: np.ndarray
    Qbar: np.ndarray
    R: np.ndarray
    n_x: int
    n_w: int
    preview: int


def build_augmented(sys, cost, preview):
    n, nw, p = sys.n_x, sys.n_w, preview
    N = n + (p + 1) * nw
    Abar = np.zeros((N, N))
    Abar[:n, :n] = sys.A
    Abar[:n, n:n + nw] = sys.Bw
    # shift chain: block i of z[t+1] is block i+1 of z[t]
    for i in range(p):
        r = n + i * nw
        Abar[r:r + nw, r + nw:r + 2 * nw] = np.eye(nw)
    Bubar = np.zeros((N, sys.n_u))
    Bubar[:n] = sys.Bu
    Bwbar = np.zeros((N, nw))
    Bwbar[N - nw:] = np.eye(nw)
    Qbar = np.zeros((N, N))
    Qbar[:n, :n] = cost.Q
    return AugmentedSystem(Abar, Bubar, Bwbar, Qbar, np.array(cost.R), n, nw, p)


def augmented_gain(aug, tol=1e-10):
    """State-feedback gain of the augmented LQR problem.

    The doubling solver used here does not need ``Abar`` nonsingular, which
    matters because the shift chain is nilpotent.
    """
    try:
        sol = dare(aug.Abar, aug.Bubar, aug.Qbar, aug.R, tol=tol, max_iter=500)
    except NumericalError as exc:
        raise NumericalError(f"augmented DARE failed for p={aug.preview}: {exc}") from None
    return np.linalg.solve(sol.H, aug.Bubar.T @ sol.P @ aug.Abar)


def expected_augmented_gain(synth):
    """``[Kx | Kw | Kv Ahat^T P Bw | ... | Kv (Ahat^T)^p P Bw]``."""
    return np.hstack([synth.Kx, *synth.preview_gains()])


def augmented_gain_check(sys, cost, preview, tol=1e-7, synth=None):
    """Largest Frobenius deviation between augmented-LQR gain blocks and
    the closed-form preview gains.  Raises :class:`OracleMismatch` above
    ``tol``."""
    synth = ih_synthesize(sys, cost, preview) if synth is None else synth
    Kbar = augmented_gain(build_augmented(sys, cost, preview))
    expected = expected_augmented_gain(synth)
    n, nw = sys.n_x, sys.n_w
    blocks = [(0, n)] + [(n + j * nw, n + (j + 1) * nw) for j in range(preview + 1)]
    dev = max(np.linalg.norm(Kbar[:, a:b] - expected[:, a:b]) for a, b in blocks)
    if dev > tol:
        raise OracleMismatch(f"augmented gain deviates by {dev:.3g} (tol {tol:.3g}) at p={preview}")
    return float(dev)


@dataclass(frozen=True)
class LinearPreviewPolicy:
    """``u[t] = -Gx x[t] - sum_{j=0}^{p} G[j] w[t+j]``."""

    Gx: np.ndarray
    G: np.ndarray  # (p+1, n_u, n_w)

    def __post_init__(self):
        object.__setattr__(self, "Gx", as_matrix(self.Gx, "Gx"))
        G = np.asarray(self.G, dtype=float)
        if G.ndim == 2:
            G = G[None]
        object.__setattr__(self, "G", G)

    @classmethod
    def from_synthesis(cls, synth):
        return cls(np.array(synth.Kx), synth.preview_gains())

    @classmethod
    def state_feedback(cls, Gx, n_w):
        Gx = as_matrix(Gx)
        return cls(Gx, np.zeros((1, Gx.shape[0], n_w)))

    @property
    def preview(self):
        return self.G.shape[0] - 1

    @property
    def flat(self):
        return np.hstack([self.Gx, *self.G])

    @classmethod
    def from_flat(cls, K, n_x, n_w):
        K = np.asarray(K, dtype=float)
        p1 = (K.shape[1] - n_x) // n_w
        G = np.stack([K[:, n_x + j * n_w:n_x + (j + 1) * n_w] for j in range(p1)])
        return cls(K[:, :n_x], G)

    def linear_policy(self):
        return self.Gx, self.G

    def predict(self, x, window):
        t = window.start
        u = -self.Gx @ x
        for j in range(self.G.shape[0]):
            u -= self.G[j] @ window[t + j]
        return u


def linear_policy_expected_cost(sys, cost, policy):
    """Exact stationary average cost of ``policy`` on ``sys``.

    The closed loop on the augmented state is ``z+ = (Abar - Bubar K) z +
    Bwbar e`` with unit-covariance ``e``; the stationary second moment
    ``S`` solves ``S = Ac S Ac^T + Bwbar Bwbar^T`` and the cost is
    ``tr((Qbar + K^T R K) S)``.
    """
    aug = build_augmented(sys, cost, policy.preview)
    K = policy.flat
    Ac = aug.Abar - aug.Bubar @ K
    rho = spectral_radius(Ac)
    if rho >= 1.0:
        raise NumericalError(f"policy does not stabilize the plant (spectral radius {rho:.6f})")
    S = scipy.linalg.solve_discrete_lyapunov(Ac, aug.Bwbar @ aug.Bwbar.T)
    return float(np.trace((aug.Qbar + K.T @ aug.R @ K) @ S))


def first_order_optimality_check(sys, cost, preview, eps=1e-6, directions=20, seed=0,
                                 synth=None):
    """Max central-difference directional derivative of the exact policy
    cost at the optimal preview gains, over random unit directions."""
    synth = ih_synthesize(sys, cost, preview) if synth is None else synth
    K0 = LinearPreviewPolicy.from_synthesis(synth).flat
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(directions):
        D = rng.standard_normal(K0.shape)
        D /= np.linalg.norm(D)
        plus = linear_policy_expected_cost(
            sys, cost, LinearPreviewPolicy.from_flat(K0 + eps * D, sys.n_x, sys.n_w))
        minus = linear_policy_expected_cost(
            sys, cost, LinearPreviewPolicy.from_flat(K0 - eps * D, sys.n_x, sys.n_w))
        worst = max(worst, abs(plus - minus) / (2 * eps))
    return worst


def random_system(rng, n_x, n_u, n_w, radius=0.95, max_draws=100):
    """Random stabilizable/detectable test problem.

    ``A`` is rescaled to spectral radius ``radius``, ``Bu`` and ``Bw`` have
    unit-normal entries, ``Q = M^T M + 1e-3 I`` and ``R = I``.  Draws that
    fail validation are redrawn.
    """
    for _ in range(max_draws):
        A = rng.standard_normal((n_x, n_x))
        rho = spectral_radius(A)
        if rho == 0:
            continue
        A *= radius / rho
        Bu = rng.standard_normal((n_x, n_u))
        Bw = rng.standard_normal((n_x, n_w))
        M = rng.standard_normal((n_x, n_x))
        sys = LtiSystem(A, Bu, Bw)
        cost = CostWeights(M.T @ M + 1e-3 * np.eye(n_x), np.eye(n_u))
        if validate_lti(sys, cost).ok:
            return sys, cost
    raise RuntimeError("could not draw a valid random system")
