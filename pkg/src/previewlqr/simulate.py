"""Closed-loop rollouts and Monte Carlo cost estimates.

A controller is any object with a ``preview`` attribute (``int``, or
``None`` for full knowledge of the disturbance record) and a method
``predict(x, window)`` returning the input.  The rollout hands it a
:class:`~previewlqr.model.DisturbanceWindow` holding only
``w[t..t+preview]``, so it cannot see disturbances outside its
information set.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionError
from .model import DisturbanceWindow, LtiSystem, LtvSystem, sample_noise
from .validation import as_vector, frozen


@dataclass(frozen=True)
class Trajectory:
    x_seq: np.ndarray  # (N+1, n_x)
    u_seq: np.ndarray  # (N, n_u)
    w_seq: np.ndarray  # (N, n_w)
    per_step_cost: np.ndarray  # (N,) stage costs x^T Q x + u^T R u
    terminal_cost: float = 0.0  # x_N^T Q_T x_N on a finite horizon, else 0

    @property
    def horizon(self):
        return self.u_seq.shape[0]

    @property
    def total_cost(self):
        return float(np.sum(self.per_step_cost) + self.terminal_cost)


@dataclass(frozen=True)
class SimReport:
    trials: int
    horizon: int
    mean_avg_cost: float
    stderr: float
    running_average_curve: np.ndarray
    seed: int
    avg_costs: np.ndarray

    @property
    def mean_total_cost(self):
        return self.mean_avg_cost * self.horizon

    @property
    def stderr_total(self):
        return self.stderr * self.horizon


def rollout(sys, cost, controller, x0, w_seq, horizon=None):
    """Simulate ``controller`` on ``sys`` driven by the record ``w_seq``.

    For an :class:`LtvSystem` the horizon is ``sys.T`` and the terminal
    cost is included.  For an :class:`LtiSystem` the horizon defaults to
    ``len(w_seq)``; a longer record lets preview controllers see past the
    simulated horizon.  Disturbances past the end of the record are zero.
    """
    w_seq = np.atleast_2d(np.asarray(w_seq, dtype=float))
    fh = isinstance(sys, LtvSystem)
    if fh:
        N = sys.T
    elif isinstance(sys, LtiSystem):
        N = w_seq.shape[0] if horizon is None else horizon
    else:
        raise TypeError(f"unsupported system type {type(sys).__name__}")
    if w_seq.shape[0] < N or w_seq.shape[1] != sys.n_w:
        raise DimensionError(f"w_seq shape {w_seq.shape} does not cover horizon {N} "
                             f"with n_w={sys.n_w}")
    record = w_seq[:N] if fh else w_seq
    x = as_vector(x0, "x0", sys.n_x).copy()
    xs = np.empty((N + 1, sys.n_x))
    us = np.empty((N, sys.n_u))
    costs = np.empty(N)
    preview = controller.preview
    for t in range(N):
        xs[t] = x
        window = DisturbanceWindow.from_record(record, t, preview)
        u = as_vector(controller.predict(x, window), "u", sys.n_u)
        us[t] = u
        if fh:
            costs[t] = cost.stage(t, x, u)
            x = sys.step(t, x, u, record[t])
        else:
            costs[t] = cost.stage(x, u)
            x = sys.step(x, u, record[t])
    xs[N] = x
    terminal = float(x @ cost.QT @ x) if fh else 0.0
    return Trajectory(frozen(xs), frozen(us), frozen(record[:N]), frozen(costs), terminal)


def running_average_cost(traj):
    """``curve[t]`` is the mean stage cost over steps ``0..t``."""
    c = np.asarray(traj.per_step_cost if isinstance(traj, Trajectory) else traj, dtype=float)
    return np.cumsum(c) / np.arange(1, c.shape[0] + 1)


def trial_seeds(seed, trials):
    """Per-trial seeds spawned from ``seed`` with :class:`numpy.random.SeedSequence`.

    Trial ``i`` always receives spawn key ``(i,)``, so raising ``trials``
    appends new draws without changing earlier ones.
    """
    return np.random.SeedSequence(seed).spawn(trials)


def record_length(sys, controller, horizon):
    if isinstance(sys, LtvSystem):
        return sys.T
    p = controller.preview
    return horizon if p is None else horizon + p


def batched_linear_costs(sys, cost, Gx, G, x0, W, horizon):
    """Stage costs of ``u = -Gx x - sum_j G[j] w[t+j]`` for a batch of records.

    ``W`` has shape ``(trials, length, n_w)`` with ``length >= horizon + p``.
    Returns an array of shape ``(trials, horizon)``.
    """
    trials = W.shape[0]
    p = G.shape[0] - 1
    # feedforward d[t] = sum_j G[j] w[t+j] for all trials at once
    D = sum(np.einsum("uw,ktw->ktu", G[j], W[:, j:j + horizon]) for j in range(p + 1))
    Acl = sys.A - sys.Bu @ Gx
    X = np.tile(np.asarray(x0, dtype=float), (trials, 1))
    costs = np.empty((trials, horizon))
    for t in range(horizon):
        U = -X @ Gx.T - D[:, t]
        costs[:, t] = (np.einsum("ki,ij,kj->k", X, cost.Q, X)
                       + np.einsum("ki,ij,kj->k", U, cost.R, U))
        X = X @ Acl.T - D[:, t] @ sys.Bu.T + W[:, t] @ sys.Bw.T
    return costs


def monte_carlo_cost(sys, cost, controller, horizon, trials, seed, x0=None, w_prefix=None,
                     fast=True):
    """Average per-step cost over ``trials`` independent disturbance draws.

    On a finite horizon the average includes the terminal cost, so
    ``mean_total_cost`` estimates the expected total cost.  ``w_prefix``
    pins the first disturbances of every trial (e.g. the initially
    previewed ones) while the rest are drawn at random.

    Controllers exposing ``linear_policy()`` on an LTI plant are simulated
    for all trials at once (``fast=True``); the disturbance draws are the
    same as on the generic path.
    """
    if trials < 2:
        raise DimensionError("monte_carlo_cost needs at least 2 trials")
    if isinstance(sys, LtvSystem):
        horizon = sys.T
    x0 = np.zeros(sys.n_x) if x0 is None else x0
    length = record_length(sys, controller, horizon)
    draws = []
    for ss in trial_seeds(seed, trials):
        w = sample_noise(sys.n_w, length, ss)
        if w_prefix is not None:
            prefix = np.atleast_2d(w_prefix)
            w[:prefix.shape[0]] = prefix
        draws.append(w)

    if fast and isinstance(sys, LtiSystem) and hasattr(controller, "linear_policy"):
        Gx, G = controller.linear_policy()
        costs = batched_linear_costs(sys, cost, Gx, G, x0, np.stack(draws), horizon)
        avgs = costs.mean(axis=1)
        curve = (np.cumsum(costs, axis=1) / np.arange(1, horizon + 1)).mean(axis=0)
    else:
        avgs = np.empty(trials)
        curve = np.zeros(horizon)
        for i, w in enumerate(draws):
            traj = rollout(sys, cost, controller, x0, w, horizon)
            avgs[i] = traj.total_cost / horizon
            curve += running_average_cost(traj)
        curve /= trials
    std = np.std(avgs, ddof=1)
    return SimReport(trials, horizon, float(np.mean(avgs)), float(std / np.sqrt(trials)),
                     frozen(curve), seed, frozen(avgs))
