"""Plant, cost and information-structure data.

The LTV plant is ``x[t+1] = A[t] x[t] + Bu[t] u[t] + Bw[t] w[t]`` on
``t = 0..T-1``; the LTI plant drops the time index.  Disturbances are IID
with zero mean and identity covariance.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import AssumptionError, DimensionError, InformationError
from .validation import (
    as_matrix,
    check_square,
    frozen,
    is_detectable,
    is_stabilizable,
    min_eig,
    symmetrize,
)

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class LtiSystem:
    A: np.ndarray
    Bu: np.ndarray
    Bw: np.ndarray

    def __post_init__(self):
        A = check_square(self.A, "A")
        n = A.shape[0]
        Bu = as_matrix(self.Bu, "Bu", (n, None))
        Bw = as_matrix(self.Bw, "Bw", (n, None))
        object.__setattr__(self, "A", frozen(A))
        object.__setattr__(self, "Bu", frozen(Bu))
        object.__setattr__(self, "Bw", frozen(Bw))

    @property
    def n_x(self):
        return self.A.shape[0]

    @property
    def n_u(self):
        return self.Bu.shape[1]

    @property
    def n_w(self):
        return self.Bw.shape[1]

    def step(self, x, u, w):
        return self.A @ x + self.Bu @ u + self.Bw @ w


@dataclass(frozen=True)
class CostWeights:
    Q: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "Q", frozen(symmetrize(self.Q, "Q")))
        object.__setattr__(self, "R", frozen(symmetrize(self.R, "R")))

    def stage(self, x, u):
        return float(x @ self.Q @ x + u @ self.R @ u)


@dataclass(frozen=True)
class LtvSystem:
    """Time-varying plant; matrices are stacked along the first axis."""

    A_seq: np.ndarray
    Bu_seq: np.ndarray
    Bw_seq: np.ndarray

    def __post_init__(self):
        A = _stack(self.A_seq, "A_seq")
        Bu = _stack(self.Bu_seq, "Bu_seq")
        Bw = _stack(self.Bw_seq, "Bw_seq")
        T = A.shape[0]
        if T < 1:
            raise DimensionError("horizon T must be at least 1")
        if A.shape[1] != A.shape[2]:
            raise DimensionError(f"A_seq matrices must be square, got {A.shape[1:]}")
        for name, M in (("Bu_seq", Bu), ("Bw_seq", Bw)):
            if M.shape[0] != T:
                raise DimensionError(f"{name} has length {M.shape[0]}, expected T={T}")
            if M.shape[1] != A.shape[1]:
                raise DimensionError(f"{name} rows {M.shape[1]} != n_x={A.shape[1]}")
        object.__setattr__(self, "A_seq", frozen(A))
        object.__setattr__(self, "Bu_seq", frozen(Bu))
        object.__setattr__(self, "Bw_seq", frozen(Bw))

    @classmethod
    def constant(cls, sys, T):
        """Repeat an :class:`LtiSystem` over a horizon of ``T`` steps."""
        return cls(
            np.repeat(sys.A[None], T, axis=0),
            np.repeat(sys.Bu[None], T, axis=0),
            np.repeat(sys.Bw[None], T, axis=0),
        )

    @property
    def T(self):
        return self.A_seq.shape[0]

    @property
    def n_x(self):
        return self.A_seq.shape[1]

    @property
    def n_u(self):
        return self.Bu_seq.shape[2]

    @property
    def n_w(self):
        return self.Bw_seq.shape[2]

    def step(self, t, x, u, w):
        return self.A_seq[t] @ x + self.Bu_seq[t] @ u + self.Bw_seq[t] @ w


@dataclass(frozen=True)
class CostSchedule:
    """``Q_seq`` covers t = 0..T (the last entry is the terminal weight)."""

    Q_seq: np.ndarray
    R_seq: np.ndarray

    def __post_init__(self):
        Q = _stack(self.Q_seq, "Q_seq")
        R = _stack(self.R_seq, "R_seq")
        if Q.shape[0] != R.shape[0] + 1:
            raise DimensionError(
                f"Q_seq must have one more entry than R_seq "
                f"(got {Q.shape[0]} and {R.shape[0]})"
            )
        Q = np.stack([symmetrize(M, f"Q_{t}") for t, M in enumerate(Q)])
        R = np.stack([symmetrize(M, f"R_{t}") for t, M in enumerate(R)])
        object.__setattr__(self, "Q_seq", frozen(Q))
        object.__setattr__(self, "R_seq", frozen(R))

    @classmethod
    def constant(cls, cost, T, QT=None):
        QT = cost.Q if QT is None else QT
        Q = np.concatenate([np.repeat(cost.Q[None], T, axis=0), as_matrix(QT)[None]])
        return cls(Q, np.repeat(cost.R[None], T, axis=0))

    @property
    def T(self):
        return self.R_seq.shape[0]

    @property
    def QT(self):
        return self.Q_seq[-1]

    def stage(self, t, x, u):
        return float(x @ self.Q_seq[t] @ x + u @ self.R_seq[t] @ u)


def _stack(seq, name):
    M = np.asarray(seq, dtype=float)
    if M.ndim == 2:
        M = M[None]
    if M.ndim != 3:
        raise DimensionError(f"{name} must be a sequence of matrices, got shape {M.shape}")
    return M


@dataclass(frozen=True)
class DisturbanceWindow:
    """Disturbances ``w[start], ..., w[start + len(values) - 1]``.

    ``preview`` bounds what a controller may ask for: indices beyond
    ``start + preview`` are outside the information set and raise
    :class:`InformationError`.  Indices inside the bound but past the end of
    ``values`` are zero (the record ended, e.g. ``j >= T`` on a finite
    horizon).  ``preview=None`` means the whole future is known.
    """

    start: int
    values: np.ndarray
    preview: int = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[None]
        if values.ndim != 2:
            raise DimensionError(f"window values must be 2-D, got shape {values.shape}")
        if self.start < 0:
            raise DimensionError("window start must be nonnegative")
        if self.preview is not None:
            if self.preview < 0:
                raise DimensionError("preview must be nonnegative")
            if values.shape[0] > self.preview + 1:
                raise DimensionError(
                    f"window holds {values.shape[0]} disturbances but preview "
                    f"{self.preview} allows at most {self.preview + 1}"
                )
        object.__setattr__(self, "values", frozen(values))

    @classmethod
    def from_record(cls, w_seq, t, preview):
        """Slice the information available at time ``t`` out of a record."""
        stop = None if preview is None else t + preview + 1
        return cls(t, np.asarray(w_seq)[t:stop], preview)

    @property
    def n_w(self):
        return self.values.shape[1]

    @property
    def stop(self):
        """One past the last index the controller may read."""
        if self.preview is None:
            return self.start + self.values.shape[0]
        return self.start + self.preview + 1

    def __len__(self):
        return self.values.shape[0]

    def __getitem__(self, j):
        if j < self.start or (self.preview is not None and j > self.start + self.preview):
            raise InformationError(
                f"w[{j}] is outside the information set "
                f"(window starts at {self.start}, preview {self.preview})"
            )
        k = j - self.start
        if k >= self.values.shape[0]:
            return np.zeros(self.n_w)
        return self.values[k]


@dataclass
class ValidationReport:
    """Pass/fail per standing assumption.  ``failures`` lists what failed."""

    checks: dict = field(default_factory=dict)

    def add(self, name, passed, detail=""):
        self.checks[name] = (bool(passed), detail)

    @property
    def ok(self):
        return all(passed for passed, _ in self.checks.values())

    @property
    def failures(self):
        return [name for name, (passed, _) in self.checks.items() if not passed]

    def raise_if_failed(self):
        if not self.ok:
            details = "; ".join(
                f"{name}: {self.checks[name][1]}" if self.checks[name][1] else name
                for name in self.failures
            )
            raise AssumptionError(f"assumptions failed: {details}", self.failures)
        return self

    def lines(self):
        return [
            f"{'PASS' if passed else 'FAIL'}  {name}" + (f"  ({detail})" if detail else "")
            for name, (passed, detail) in self.checks.items()
        ]


def validate_lti(sys, cost, tol=DEFAULT_TOL):
    n = sys.n_x
    if cost.Q.shape != (n, n) or cost.R.shape != (sys.n_u, sys.n_u):
        raise DimensionError(
            f"cost shapes Q{cost.Q.shape}, R{cost.R.shape} do not match "
            f"n_x={n}, n_u={sys.n_u}"
        )
    report = ValidationReport()
    s = np.linalg.svd(sys.A, compute_uv=False)
    report.add("A nonsingular", s[0] > 0 and s[-1] > tol * s[0], f"sigma_min={s[-1]:.3g}")
    report.add("(A, Bu) stabilizable", is_stabilizable(sys.A, sys.Bu, tol))
    report.add("(A, Q) detectable", is_detectable(sys.A, cost.Q, tol))
    qmin = min_eig(cost.Q)
    report.add("Q positive semidefinite", qmin >= -tol * max(1.0, np.abs(cost.Q).max()),
               f"min eig {qmin:.3g}")
    rmin = min_eig(cost.R)
    report.add("R positive definite", rmin > tol, f"min eig {rmin:.3g}")
    return report


def validate_ltv(sys, cost, tol=DEFAULT_TOL):
    if cost.T != sys.T:
        raise DimensionError(f"cost horizon {cost.T} != system horizon {sys.T}")
    n, m = sys.n_x, sys.n_u
    if cost.Q_seq.shape[1:] != (n, n) or cost.R_seq.shape[1:] != (m, m):
        raise DimensionError(
            f"cost shapes Q{cost.Q_seq.shape[1:]}, R{cost.R_seq.shape[1:]} do not "
            f"match n_x={n}, n_u={m}"
        )
    report = ValidationReport()
    for t, Q in enumerate(cost.Q_seq):
        qmin = min_eig(Q)
        report.add(f"Q_{t} positive semidefinite",
                   qmin >= -tol * max(1.0, np.abs(Q).max()), f"min eig {qmin:.3g}")
    for t, R in enumerate(cost.R_seq):
        rmin = min_eig(R)
        report.add(f"R_{t} positive definite", rmin > tol, f"min eig {rmin:.3g}")
    return report


def sample_noise(n_w, length, seed):
    """IID standard normal disturbances, shape ``(length, n_w)``.

    Uses numpy's PCG64 bit generator seeded with ``seed`` and its ziggurat
    normal sampler (``Generator.standard_normal``), so output is reproducible
    bit for bit for a given numpy release.
    """
    if length < 1:
        raise DimensionError("length must be at least 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.standard_normal((length, n_w))
