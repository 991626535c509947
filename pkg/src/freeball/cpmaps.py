"""The completely positive map of a tuple and its Perron normalization.

``apply_cp(X, T) = sum_j X_j T X_j*`` is the Kraus-form CP map attached to a
tuple. For a generic strict row contraction its top eigenvalue ``r`` is
simple with a positive-definite eigenmatrix ``A``; conjugating by
``S = sqrt(A)`` turns the tuple into ``sqrt(r)`` times a coisometry.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOL, ToleranceConfig
from .errors import (
    ConvergenceError,
    DimensionMismatchError,
    NotGenericError,
    NumericalFailureError,
)
from .linalg import as_complex_matrix, hermitian_sqrt
from .points import MatrixTuple, conjugate, row_norm
from .structure import invariant_subspace_witness, is_generic

# Dense eigendecomposition is the oracle-grade path at desk scale; above
# this size fall back to power iteration on the map itself.
_DENSE_LIMIT = 16


def apply_cp(x: MatrixTuple, t) -> np.ndarray:
    """``sum_j X_j T X_j*`` for an n x n matrix ``T``."""
    t = as_complex_matrix(t, "T")
    if t.shape != (x.n, x.n):
        raise DimensionMismatchError(f"T has shape {t.shape}, expected {(x.n, x.n)}")
    out = np.zeros((x.n, x.n), dtype=np.complex128)
    for c in x.coords:
        out += c @ t @ c.conj().T
    return out


def superoperator_matrix(x: MatrixTuple) -> np.ndarray:
    """Dense n² x n² matrix of ``T -> apply_cp(X, T)`` on column-stacked vec(T).

    With ``vec`` in column order, ``vec(A T B) = (B^T (x) A) vec(T)``, so the
    term ``X_j T X_j*`` contributes ``conj(X_j) (x) X_j``.
    """
    n2 = x.n * x.n
    out = np.zeros((n2, n2), dtype=np.complex128)
    for c in x.coords:
        out += np.kron(c.conj(), c)
    return out


def spectral_radius(x: MatrixTuple) -> float:
    """Largest eigenvalue magnitude of the CP map; < 1 for strict contractions."""
    eigenvalues = np.linalg.eigvals(superoperator_matrix(x))
    return float(np.abs(eigenvalues).max()) if eigenvalues.size else 0.0


@dataclass(frozen=True)
class PerronData:
    """Top eigenvalue ``r`` of the CP map with its positive-definite eigenmatrix.

    ``a`` is Hermitian, positive definite, trace-normalized to n;
    ``s = hermitian_sqrt(a)``; ``residual = |apply_cp(X, A) - r A|_F``;
    ``gap`` is the relative distance to the second eigenvalue magnitude,
    with ``near_degenerate`` set when the gap falls below 1e-10 (the result
    is still returned).
    """

    r: float
    a: np.ndarray
    s: np.ndarray
    residual: float
    gap: float
    near_degenerate: bool


def perron_pair(x: MatrixTuple, tol: ToleranceConfig = DEFAULT_TOL) -> PerronData:
    """Perron eigenvalue and positive-definite eigenmatrix of the CP map.

    Requires a generic strict row contraction: genericity makes the CP map
    irreducible, which guarantees a simple top eigenvalue with a PD
    eigenmatrix. Non-generic input raises :class:`NotGenericError` carrying
    an invariant-subspace witness; an eigenmatrix that fails to be PD within
    tolerance raises :class:`NumericalFailureError`.
    """
    rn = row_norm(x)
    if rn >= 1:
        raise NumericalFailureError(f"tuple is not a strict row contraction (row_norm = {rn:.6g})")
    generic, dim = is_generic(x, tol.rank_tol)
    if not generic:
        witness = invariant_subspace_witness(x, tol.rank_tol)
        detail = ""
        if witness is not None:
            flat = np.array2string(witness, precision=4, separator=", ").replace("\n", "")
            detail = f"; invariant subspace of dimension {witness.shape[1]} spanned by columns of {flat}"
        raise NotGenericError(
            f"tuple is not generic (word span has dimension {dim} < {x.n * x.n}), "
            f"the CP map is reducible{detail}"
        )

    n = x.n
    if n <= _DENSE_LIMIT:
        r, a = _dense_top_eigenmatrix(x)
    else:
        r, a = _power_top_eigenmatrix(x, tol)

    # The eigensolver returns A up to phase and scale; restore the Hermitian
    # positive-definite representative with trace n.
    a = (a + a.conj().T) / 2
    trace = np.trace(a)
    if abs(trace) < tol.rank_tol:
        raise NumericalFailureError("Perron eigenmatrix has vanishing trace; cannot normalize")
    a = a * (n / trace)
    a = (a + a.conj().T) / 2
    min_eig = float(np.linalg.eigvalsh(a).min())
    if min_eig <= tol.rank_tol:
        raise NumericalFailureError(
            f"Perron eigenmatrix is not positive definite (min eigenvalue {min_eig:.3e})"
        )
    residual = float(np.linalg.norm(apply_cp(x, a) - r * a))
    if residual > tol.residual_tol:
        raise NumericalFailureError(f"Perron residual too large: {residual:.3e}")

    gap = _relative_gap(x, r)
    near_degenerate = gap < 1e-10
    if near_degenerate:
        warnings.warn(
            f"Perron eigenvalue nearly degenerate (relative gap {gap:.3e})",
            RuntimeWarning,
            stacklevel=2,
        )
    return PerronData(float(r), a, hermitian_sqrt(a, tol), residual, gap, near_degenerate)


def _dense_top_eigenmatrix(x: MatrixTuple) -> tuple[float, np.ndarray]:
    phi = superoperator_matrix(x)
    eigenvalues, eigenvectors = np.linalg.eig(phi)
    magnitudes = np.abs(eigenvalues)
    top_magnitude = magnitudes.max()
    # The peripheral spectrum may contain rotations of the Perron root
    # (period > 1); the Perron root itself is the real positive one.
    peripheral = np.flatnonzero(magnitudes >= top_magnitude * (1 - 1e-9))
    top = peripheral[np.argmax(eigenvalues[peripheral].real)]
    r = eigenvalues[top]
    a = eigenvectors[:, top].reshape((x.n, x.n), order="F")
    # Rotate the phase so the Hermitian part dominates (A is determined up to
    # a unit scalar; the true eigenmatrix is Hermitian).
    trace = np.trace(a)
    if abs(trace) > 1e-14:
        a = a * (trace.conjugate() / abs(trace))
    return float(r.real), a


def _power_top_eigenmatrix(x: MatrixTuple, tol: ToleranceConfig) -> tuple[float, np.ndarray]:
    n = x.n
    a = np.eye(n, dtype=np.complex128)
    r = 1.0
    for _ in range(10_000):
        nxt = apply_cp(x, a)
        nxt = (nxt + nxt.conj().T) / 2
        norm = float(np.linalg.norm(nxt))
        if norm == 0:
            raise NumericalFailureError("power iteration collapsed to zero")
        nxt /= norm
        r = norm
        if float(np.linalg.norm(nxt - a)) < 1e-14:
            return r, nxt
        a = nxt
    raise ConvergenceError(
        "power iteration did not converge in 10000 steps (peripheral spectrum "
        "may have period > 1; only sizes within the dense path are certified)"
    )


def _relative_gap(x: MatrixTuple, r: float) -> float:
    if x.n > _DENSE_LIMIT:
        return float("nan")
    eigenvalues = np.linalg.eigvals(superoperator_matrix(x))
    magnitudes = np.sort(np.abs(eigenvalues))[::-1]
    if magnitudes.size < 2 or r == 0:
        return float("inf")
    return float((r - magnitudes[1]) / r)


def coisometry_normalizer(
    x: MatrixTuple, tol: ToleranceConfig = DEFAULT_TOL
) -> tuple[np.ndarray, float]:
    """Similarity ``S`` with ``(S^{-1} X S)(S^{-1} X S)* = r I``, and that ``r``.

    ``S`` is the Hermitian square root of the Perron eigenmatrix; dividing
    the normalized tuple by ``sqrt(r)`` yields a coisometry direction.
    """
    data = perron_pair(x, tol)
    y = conjugate(x, data.s)
    gram = sum(c @ c.conj().T for c in y.coords)
    defect = float(np.linalg.norm(gram - data.r * np.eye(x.n)))
    if defect > tol.residual_tol * x.n:
        raise NumericalFailureError(
            f"normalization defect {defect:.3e} exceeds {tol.residual_tol * x.n:.3e}"
        )
    return data.s, data.r
