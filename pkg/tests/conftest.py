import numpy as np
import pytest

from previewlqr.config import load_config
from previewlqr.model import CostSchedule, CostWeights, LtiSystem, LtvSystem


@pytest.fixture(scope="session")
def boeing():
    cfg = load_config()
    return cfg.system, cfg.cost


@pytest.fixture
def scalar():
    """``A = 0.5, Bu = Bw = 1, Q = R = 1``."""
    return LtiSystem([[0.5]], [[1.0]], [[1.0]]), CostWeights([[1.0]], [[1.0]])


def scalar_dare_root(a=0.5, b=1.0, q=1.0, r=1.0):
    # P = q + a^2 P r / (r + b^2 P)  =>  b^2 P^2 + (r - a^2 r - q b^2) P - q r = 0
    c2, c1, c0 = b * b, r - a * a * r - q * b * b, -q * r
    return (-c1 + np.sqrt(c1 * c1 - 4 * c2 * c0)) / (2 * c2)


def random_ltv(rng, T=None, n_x=None, n_u=None, n_w=None):
    """Random finite-horizon problem with PSD (possibly singular) Q_t."""
    T = int(rng.integers(1, 16)) if T is None else T
    n_x = int(rng.integers(1, 5)) if n_x is None else n_x
    n_u = int(rng.integers(1, 3)) if n_u is None else n_u
    n_w = int(rng.integers(1, 3)) if n_w is None else n_w
    A = rng.standard_normal((T, n_x, n_x)) / np.sqrt(n_x)
    Bu = rng.standard_normal((T, n_x, n_u))
    Bw = rng.standard_normal((T, n_x, n_w))
    k = int(rng.integers(0, n_x + 1))
    M = rng.standard_normal((T + 1, k, n_x))
    Q = np.einsum("tki,tkj->tij", M, M)
    N = rng.standard_normal((T, n_u, n_u))
    R = np.einsum("tki,tkj->tij", N, N) + 0.1 * np.eye(n_u)
    return LtvSystem(A, Bu, Bw), CostSchedule(Q, R)
