"""Input validation helpers shared by the synthesis modules."""

import numpy as np

from .exceptions import AssumptionError, DimensionError

SYMMETRY_TOL = 1e-10


def as_matrix(M, name="matrix", shape=None):
    """Return ``M`` as a 2-D float array, optionally checking its shape.

    Scalars become ``1x1`` matrices and 1-D inputs become column vectors,
    which is the convention used for ``B`` matrices of single-input plants.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    elif M.ndim == 1:
        M = M.reshape(-1, 1)
    elif M.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DimensionError(f"{name} contains non-finite entries")
    if shape is not None:
        for axis, (got, want) in enumerate(zip(M.shape, shape)):
            if want is not None and got != want:
                raise DimensionError(
                    f"{name} has shape {M.shape}, expected "
                    f"{tuple('*' if s is None else s for s in shape)}"
                )
    return M


def as_vector(v, name="vector", size=None):
    v = np.asarray(v, dtype=float)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1:
        raise DimensionError(f"{name} must be 1-D, got shape {v.shape}")
    if size is not None and v.shape[0] != size:
        raise DimensionError(f"{name} has length {v.shape[0]}, expected {size}")
    return v


def check_square(M, name="matrix"):
    M = as_matrix(M, name)
    if M.shape[0] != M.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {M.shape}")
    return M


def symmetrize(M, name="matrix", tol=SYMMETRY_TOL):
    """Return ``(M + M^T) / 2``.

    Asymmetry up to ``tol`` (relative to the largest entry) is treated as
    round-off and repaired silently; anything larger raises.
    """
    M = check_square(M, name)
    scale = max(np.max(np.abs(M)), 1.0) if M.size else 1.0
    asym = np.max(np.abs(M - M.T)) if M.size else 0.0
    if asym > tol * scale:
        raise AssumptionError(
            f"{name} is not symmetric (max |M - M^T| = {asym:.3g})",
            failures=[f"{name} symmetric"],
        )
    return 0.5 * (M + M.T)


def frozen(M):
    """Return a read-only copy so dataclass fields stay immutable."""
    M = np.array(M, dtype=float, copy=True)
    M.setflags(write=False)
    return M


def min_eig(M):
    return float(np.linalg.eigvalsh(0.5 * (M + M.T))[0]) if M.size else 0.0


def spectral_radius(M):
    return float(np.max(np.abs(np.linalg.eigvals(M)))) if M.size else 0.0


def numerical_rank(M, tol):
    """Rank of ``M`` using singular values relative to the largest one."""
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def is_stabilizable(A, B, tol=1e-9):
    """PBH test at every eigenvalue with modulus >= 1 - tol."""
    n = A.shape[0]
    for lam in np.linalg.eigvals(A):
        if abs(lam) >= 1.0 - tol:
            pencil = np.hstack([A - lam * np.eye(n), B.astype(complex)])
            if numerical_rank(pencil, tol) < n:
                return False
    return True


def is_detectable(A, C, tol=1e-9):
    """Detectability of ``(A, C)`` as stabilizability of ``(A^T, C^T)``."""
    return is_stabilizable(A.T, C.T, tol)
