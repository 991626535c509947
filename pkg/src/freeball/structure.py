"""Structural predicates on matrix tuples.

Genericity (does the tuple generate the full matrix algebra), the linear
relations satisfied by the coordinates, the induced matrix-span subspaces,
and a randomized simultaneous block-triangularization into generic
constituents.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOL, ToleranceConfig, child_rng
from .errors import ConvergenceError, DimensionMismatchError, DomainError
from .linalg import (
    kernel_basis,
    numerical_rank,
    orthonormal_columns,
    orthonormal_complement,
)
from .points import MatrixTuple, conjugate


@dataclass(frozen=True)
class LinearRelations:
    """Orthonormal basis of ``{alpha in C^d : sum_j alpha_j X_j = 0}``."""

    d: int
    basis: np.ndarray  # (d, k) columns

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def residual(self, x: MatrixTuple) -> float:
        """Largest ``|sum_j alpha_j X_j|_F`` over the basis relations."""
        if x.d != self.d:
            raise DimensionMismatchError(f"point has d={x.d}, relations have d={self.d}")
        worst = 0.0
        for k in range(self.dim):
            combo = sum(self.basis[j, k] * x.coords[j] for j in range(self.d))
            worst = max(worst, float(np.linalg.norm(combo)))
        return worst


def linear_relations(x: MatrixTuple, tol: float = DEFAULT_TOL.rank_tol) -> LinearRelations:
    """Relations of the coordinates: kernel of the n² x d vectorization matrix."""
    m = np.column_stack([c.flatten(order="F") for c in x.coords])
    return LinearRelations(x.d, kernel_basis(m, tol))


@dataclass(frozen=True)
class MatSpanSubspace:
    """The level-1 subspace ``V(1) <= C^d`` whose level-n points are ``V(1) (x) M_n``.

    A level-n tuple belongs to the lift exactly when each entry-fiber
    ``(Z_1[k,l], ..., Z_d[k,l])`` lies in ``V(1)``; equivalently, every
    linear relation that vanishes on ``V(1)`` annihilates the coordinates
    of ``Z``.
    """

    d: int
    level1_basis: np.ndarray  # (d, k) orthonormal columns

    @property
    def dim(self) -> int:
        return self.level1_basis.shape[1]

    @property
    def is_full(self) -> bool:
        return self.dim == self.d

    def normal_basis(self) -> np.ndarray:
        return orthonormal_complement(self.level1_basis, self.d)

    def normal_distance(self, z: MatrixTuple) -> float:
        """Frobenius norm of the component of ``z`` orthogonal to the lift."""
        if z.d != self.d:
            raise DimensionMismatchError(f"point has d={z.d}, subspace has d={self.d}")
        normal = self.normal_basis()
        if normal.shape[1] == 0:
            return 0.0
        stacked = np.stack([c for c in z.coords])  # (d, n, n)
        components = np.tensordot(normal.conj().T, stacked, axes=(1, 0))
        return float(np.sqrt(np.sum(np.abs(components) ** 2)))

    def project(self, z: MatrixTuple) -> MatrixTuple:
        """Orthogonal projection of ``z`` onto the level-n lift."""
        if z.d != self.d:
            raise DimensionMismatchError(f"point has d={z.d}, subspace has d={self.d}")
        basis = self.level1_basis
        stacked = np.stack([c for c in z.coords])
        coeffs = np.tensordot(basis.conj().T, stacked, axes=(1, 0))  # (k, n, n)
        projected = np.tensordot(basis, coeffs, axes=(1, 0))  # (d, n, n)
        return MatrixTuple(list(projected))


def mat_span(points: list[MatrixTuple], tol: float = DEFAULT_TOL.rank_tol) -> MatSpanSubspace:
    """Smallest lifted subspace containing the given points.

    Computed from the relations common to all points: stack every point's
    vectorized coordinate matrix, take the kernel (the shared relations L),
    and return ``V(1) = {z : alpha^T z = 0 for all alpha in L}``. For a
    single point this is exactly the span of all images ``(T(X_1), ...,
    T(X_d))`` over linear maps ``T`` on matrices.
    """
    if not points:
        raise DomainError("mat_span needs at least one point")
    d = points[0].d
    if any(p.d != d for p in points):
        raise DimensionMismatchError(f"points mix tuple lengths: {[p.d for p in points]}")
    stacked = np.vstack(
        [np.column_stack([c.flatten(order="F") for c in p.coords]) for p in points]
    )
    common_relations = kernel_basis(stacked, tol)
    # alpha^T z = 0 for all relations alpha <=> z orthogonal to conj(alpha).
    level1 = kernel_basis(common_relations.T, tol)
    return MatSpanSubspace(d, level1)


def in_mat_span(v: MatSpanSubspace, z: MatrixTuple, tol: float = DEFAULT_TOL.residual_tol) -> bool:
    """Whether every relation vanishing on ``V(1)`` annihilates ``z``."""
    return v.normal_distance(z) <= tol


def _word_span_basis(x: MatrixTuple, tol: float) -> np.ndarray:
    """Orthonormal basis (columns, vectorized) of the non-unital word span.

    Spans words in the coordinates of increasing length until the dimension
    stabilizes (capped at words of length n², a safety net; stabilization
    implies closure under left multiplication by every coordinate).
    """
    n = x.n
    coords = [c.flatten(order="F") for c in x.coords]
    basis = orthonormal_columns(np.column_stack(coords), tol) if coords else np.zeros((n * n, 0))
    for _ in range(n * n):
        if basis.shape[1] == 0 or basis.shape[1] == n * n:
            break
        mats = [basis[:, k].reshape((n, n), order="F") for k in range(basis.shape[1])]
        new_vecs = [(xj @ m).flatten(order="F") for xj in x.coords for m in mats]
        enlarged = orthonormal_columns(np.column_stack([basis] + [v[:, None] for v in new_vecs]), tol)
        if enlarged.shape[1] == basis.shape[1]:
            break
        basis = enlarged
    return basis


def is_generic(x: MatrixTuple, tol: float = DEFAULT_TOL.rank_tol) -> tuple[bool, int]:
    """Whether the coordinates generate the full matrix algebra.

    Returns ``(flag, dim)`` where ``dim`` is the stabilized dimension of the
    word span (words of length >= 1). At n = 1 this makes the zero tuple the
    single non-generic point.
    """
    basis = _word_span_basis(x, tol)
    dim = basis.shape[1]
    return dim == x.n * x.n, dim


def invariant_subspace_witness(
    x: MatrixTuple, tol: float = DEFAULT_TOL.rank_tol, seed: int = 0, retries: int = 10
) -> np.ndarray | None:
    """A proper nonzero subspace (orthonormal columns) invariant under all X_j.

    Returns None when no witness is found (in particular for generic tuples
    and always at n = 1, where no proper nonzero subspace exists). The
    search takes eigenvectors of random elements of the word span and grows
    cyclic subspaces; for a reducible tuple a witness appears with
    probability 1.
    """
    n = x.n
    if n == 1:
        return None
    algebra = _word_span_basis(x, tol)
    if algebra.shape[1] == n * n:
        return None
    rng = child_rng(seed, "invariant-subspace-witness")
    candidates: list[np.ndarray] = []
    if algebra.shape[1] == 0:
        candidates.append(np.eye(n, dtype=np.complex128)[:, :1])
    for _ in range(retries):
        if algebra.shape[1] == 0:
            break
        weights = rng.standard_normal(algebra.shape[1]) + 1j * rng.standard_normal(algebra.shape[1])
        element = (algebra @ weights).reshape((n, n), order="F")
        eigenvalues = np.linalg.eigvals(element)
        for lam in eigenvalues:
            shifted = element - lam * np.eye(n)
            _, _, vh = np.linalg.svd(shifted)
            candidates.append(vh[-1].conj()[:, None])
    for vec in candidates:
        cyclic = _cyclic_subspace(x, vec, tol)
        if 0 < cyclic.shape[1] < n:
            return cyclic
    return None


def _cyclic_subspace(x: MatrixTuple, v: np.ndarray, tol: float) -> np.ndarray:
    """Smallest coordinate-invariant subspace containing ``v`` (orthonormal columns)."""
    basis = orthonormal_columns(v, tol)
    for _ in range(x.n):
        images = [xj @ basis for xj in x.coords]
        enlarged = orthonormal_columns(np.hstack([basis] + images), tol)
        if enlarged.shape[1] == basis.shape[1]:
            return basis
        basis = enlarged
    return basis


@dataclass(frozen=True)
class JHDecomposition:
    """Simultaneous block-upper-triangularization with generic diagonal blocks."""

    s: np.ndarray
    block_sizes: tuple[int, ...]
    constituents: tuple[MatrixTuple, ...] = field(repr=False)

    @property
    def n_blocks(self) -> int:
        return len(self.block_sizes)


def jordan_holder(
    x: MatrixTuple, tol: ToleranceConfig = DEFAULT_TOL, seed: int = 0
) -> JHDecomposition:
    """Block-triangularize all coordinates simultaneously.

    The similarity ``S`` is built from unitary completions of invariant
    subspaces found by randomized search, so it stays well-conditioned; the
    recursion continues until every diagonal block is generic (or 1x1).
    Raises :class:`ConvergenceError` if the randomized search exhausts its
    retry budget (50 attempts per split), carrying the partial result.
    """
    n = x.n
    s_total = np.eye(n, dtype=np.complex128)
    sizes: list[int] = []
    constituents: list[MatrixTuple] = []

    def split(block: MatrixTuple, offset: int, attempt_seed: int) -> None:
        m = block.n
        generic, _ = is_generic(block, tol.rank_tol)
        if generic or m == 1:
            sizes.append(m)
            constituents.append(block)
            return
        witness = None
        for attempt in range(50):
            witness = invariant_subspace_witness(
                block, tol.rank_tol, seed=attempt_seed + attempt, retries=3
            )
            if witness is not None:
                break
        if witness is None:
            raise ConvergenceError(
                f"no invariant subspace found for a reducible {m}x{m} block after 50 retries "
                f"(partial block sizes: {sizes + [m]})"
            )
        k = witness.shape[1]
        completion = orthonormal_complement(witness, m)
        u = np.hstack([witness, completion])  # unitary
        nonlocal s_total
        embed = np.eye(n, dtype=np.complex128)
        embed[offset : offset + m, offset : offset + m] = u
        s_total = s_total @ embed
        rotated = conjugate(block, u)
        top = MatrixTuple([c[:k, :k] for c in rotated.coords])
        bottom = MatrixTuple([c[k:, k:] for c in rotated.coords])
        split(top, offset, attempt_seed * 2 + 1)
        split(bottom, offset + k, attempt_seed * 2 + 2)

    split(x, 0, seed + 1)
    return JHDecomposition(s_total, tuple(sizes), tuple(constituents))


def reassemble(decomposition: JHDecomposition, x: MatrixTuple) -> float:
    """Reconstruction residual of ``S (block form) S^{-1}`` against ``x``.

    The block form is ``S^{-1} X S`` with everything below the block
    diagonal zeroed, so this measures what the decomposition discards.
    """
    rotated = conjugate(x, decomposition.s)
    cleaned = []
    for mat in rotated.coords:
        mat = mat.copy()
        offset = 0
        for size in decomposition.block_sizes:
            mat[offset + size :, offset : offset + size] = 0
            offset += size
        cleaned.append(mat)
    back = conjugate(MatrixTuple(cleaned), np.linalg.inv(decomposition.s))
    return float(max(np.abs(b - a).max() for a, b in zip(x.coords, back.coords)))


def subdiagonal_defect(decomposition: JHDecomposition, x: MatrixTuple) -> float:
    """Largest below-block entry of ``S^{-1} X_j S`` (should be ~0)."""
    rotated = conjugate(x, decomposition.s)
    worst = 0.0
    for mat in rotated.coords:
        offset = 0
        for size in decomposition.block_sizes:
            below = mat[offset + size :, offset : offset + size]
            if below.size:
                worst = max(worst, float(np.abs(below).max()))
            offset += size
    return worst
