"""Small dense linear-algebra helpers used throughout the package.

Everything here wraps numpy/scipy primitives with the package's tolerance
conventions: ranks and kernels are decided by absolute singular-value
thresholds from :class:`~freeball.config.ToleranceConfig`.
"""

from __future__ import annotations

import numpy as np

from .config import DEFAULT_TOL, ToleranceConfig
from .errors import DimensionMismatchError, DomainError


def as_complex_matrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D complex128 array (copying only if needed)."""
    arr = np.asarray(m)
    if arr.ndim != 2:
        raise DimensionMismatchError(f"{name} must be 2-D, got shape {arr.shape}")
    arr = arr.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise DomainError(f"{name} contains non-finite entries")
    return arr


def hermitian_sqrt(m, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Principal square root of a positive semidefinite Hermitian matrix.

    Rejects inputs that are not Hermitian (up to ``residual_tol``) or that
    have an eigenvalue below ``-rank_tol``. Small negative eigenvalues in
    ``[-rank_tol, 0)`` are clipped to zero.
    """
    a = as_complex_matrix(m, "hermitian_sqrt input")
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"hermitian_sqrt needs a square matrix, got {a.shape}")
    herm_defect = np.abs(a - a.conj().T).max() if a.size else 0.0
    if herm_defect > tol.residual_tol:
        raise DomainError(f"matrix is not Hermitian (defect {herm_defect:.3e})")
    a = (a + a.conj().T) / 2
    eigvals, eigvecs = np.linalg.eigh(a)
    if eigvals.size and eigvals[0] < -tol.rank_tol:
        raise DomainError(f"matrix is not positive semidefinite (min eigenvalue {eigvals[0]:.3e})")
    root = eigvecs @ np.diag(np.sqrt(np.clip(eigvals, 0, None))) @ eigvecs.conj().T
    return (root + root.conj().T) / 2


def singular_values(m) -> np.ndarray:
    a = as_complex_matrix(m)
    if 0 in a.shape:
        return np.zeros(0)
    return np.linalg.svd(a, compute_uv=False)


def numerical_rank(m, tol: float = DEFAULT_TOL.rank_tol) -> int:
    """Number of singular values strictly above the absolute threshold ``tol``."""
    return int(np.sum(singular_values(m) > tol))


def kernel_basis(m, tol: float = DEFAULT_TOL.rank_tol) -> np.ndarray:
    """Orthonormal basis (as columns) of the numerical null space of ``m``.

    Returns an ``(ncols, k)`` array; ``k = 0`` when the kernel is trivial.
    """
    a = as_complex_matrix(m, "kernel_basis input")
    if a.shape[0] == 0:
        return np.eye(a.shape[1], dtype=np.complex128)
    if a.shape[1] == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    _, s, vh = np.linalg.svd(a)
    rank = int(np.sum(s > tol))
    return vh[rank:].conj().T


def orthonormal_columns(m, tol: float = DEFAULT_TOL.rank_tol) -> np.ndarray:
    """Orthonormal basis (as columns) for the column space of ``m``."""
    a = as_complex_matrix(m, "orthonormal_columns input")
    if 0 in a.shape:
        return np.zeros((a.shape[0], 0), dtype=np.complex128)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    rank = int(np.sum(s > tol))
    return u[:, :rank]


def orthonormal_complement(basis: np.ndarray, dim: int, tol: float = DEFAULT_TOL.rank_tol) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of ``range(basis)`` in C^dim."""
    b = as_complex_matrix(basis, "orthonormal_complement input")
    if b.shape[0] != dim:
        raise DimensionMismatchError(f"basis has {b.shape[0]} rows, expected {dim}")
    return kernel_basis(b.conj().T, tol)


def principal_angles(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Principal angles between the column spaces of ``a`` and ``b`` (radians).

    Inputs are orthonormalized first, so arbitrary spanning sets are fine.
    Angles below pi/4 are recomputed from sines (Bjorck-Golub): arccos of a
    cosine near 1 loses half the working precision, which would report
    ~1e-8 for subspaces that are equal to machine precision.
    """
    qa = orthonormal_columns(a)
    qb = orthonormal_columns(b)
    if qa.shape[0] != qb.shape[0]:
        raise DimensionMismatchError(
            f"subspaces live in different ambient spaces ({qa.shape[0]} vs {qb.shape[0]})"
        )
    if qa.shape[1] == 0 or qb.shape[1] == 0:
        return np.zeros(0)
    m = qa.conj().T @ qb
    cosines = np.linalg.svd(m, compute_uv=False)  # descending, angles ascending
    angles = np.arccos(np.clip(cosines, -1.0, 1.0))
    small = cosines > np.sqrt(0.5)
    if small.any():
        sines = np.linalg.svd(qb - qa @ m, compute_uv=False)
        from_sines = np.arcsin(np.sort(np.clip(sines, 0.0, 1.0))[: cosines.size])
        angles[small] = from_sines[small]
    return angles


def subspaces_equal(a: np.ndarray, b: np.ndarray, tol: float = 1e-8) -> bool:
    """Whether two column spaces coincide: equal dimension and all angles < tol."""
    qa = orthonormal_columns(a)
    qb = orthonormal_columns(b)
    if qa.shape[1] != qb.shape[1]:
        return False
    if qa.shape[1] == 0:
        return True
    angles = principal_angles(qa, qb)
    return bool(angles.max() < tol)
