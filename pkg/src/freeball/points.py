"""Matrix tuples, tangent tuples, and the row-contraction geometry.

A point at level ``n`` is a ``d``-tuple of ``n x n`` complex matrices,
vectorized coordinate-major with column-stacking inside each coordinate:
``to_vector(X) = concat(vec(X_1), ..., vec(X_d))`` with ``vec`` in Fortran
(column) order. All Kronecker-product formulas in the package assume this
layout.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .config import DEFAULT_TOL, ToleranceConfig
from .errors import DimensionMismatchError, DomainError
from .linalg import as_complex_matrix


def _coerce_coords(coords: Iterable, square: bool) -> tuple[np.ndarray, ...]:
    mats = tuple(as_complex_matrix(c, f"coordinate {i + 1}") for i, c in enumerate(coords))
    if not mats:
        raise DimensionMismatchError("a tuple needs at least one coordinate")
    shape = mats[0].shape
    if any(m.shape != shape for m in mats):
        raise DimensionMismatchError(
            f"coordinates must share one shape, got {[m.shape for m in mats]}"
        )
    if square and shape[0] != shape[1]:
        raise DimensionMismatchError(f"point coordinates must be square, got {shape}")
    return mats


@dataclass(frozen=True, eq=False)
class MatrixTuple:
    """A ``d``-tuple of square complex matrices of one size ``n``."""

    coords: tuple[np.ndarray, ...]

    def __init__(self, coords: Iterable):
        object.__setattr__(self, "coords", _coerce_coords(coords, square=True))

    @property
    def d(self) -> int:
        return len(self.coords)

    @property
    def n(self) -> int:
        return self.coords[0].shape[0]

    @classmethod
    def zeros(cls, d: int, n: int) -> "MatrixTuple":
        return cls([np.zeros((n, n)) for _ in range(d)])

    @classmethod
    def from_scalar_point(cls, a: Sequence[complex], n: int = 1) -> "MatrixTuple":
        """The ampliation ``a ⊗ I_n`` of a scalar point ``a`` in C^d."""
        vec = np.atleast_1d(np.asarray(a, dtype=np.complex128))
        if vec.ndim != 1 or vec.size == 0:
            raise DimensionMismatchError("scalar point must be a nonempty vector")
        return cls([val * np.eye(n) for val in vec])

    def horizontal(self) -> np.ndarray:
        """The row block ``[X_1 X_2 ... X_d]`` of shape ``(n, d*n)``."""
        return np.hstack(self.coords)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([c.flatten(order="F") for c in self.coords])

    @classmethod
    def from_vector(cls, v: np.ndarray, d: int, n: int) -> "MatrixTuple":
        v = np.asarray(v, dtype=np.complex128).reshape(-1)
        if v.size != d * n * n:
            raise DimensionMismatchError(f"vector has {v.size} entries, expected {d * n * n}")
        return cls([v[j * n * n : (j + 1) * n * n].reshape((n, n), order="F") for j in range(d)])

    def frob_norm(self) -> float:
        return float(np.sqrt(sum(np.linalg.norm(c) ** 2 for c in self.coords)))

    def __add__(self, other: "MatrixTuple") -> "MatrixTuple":
        _check_same_shape(self, other)
        return MatrixTuple([a + b for a, b in zip(self.coords, other.coords)])

    def __sub__(self, other: "MatrixTuple") -> "MatrixTuple":
        _check_same_shape(self, other)
        return MatrixTuple([a - b for a, b in zip(self.coords, other.coords)])

    def __mul__(self, scalar) -> "MatrixTuple":
        return MatrixTuple([complex(scalar) * c for c in self.coords])

    __rmul__ = __mul__

    def __neg__(self) -> "MatrixTuple":
        return self * (-1)

    def __repr__(self) -> str:
        return f"MatrixTuple(d={self.d}, n={self.n})"


@dataclass(frozen=True, eq=False)
class TangentTuple:
    """A ``d``-tuple of rectangular blocks, one shared shape ``(rows, cols)``.

    These appear as the direction argument and the result of the
    difference-differential operator; ``rows``/``cols`` are the sizes of the
    two base points.
    """

    blocks: tuple[np.ndarray, ...]

    def __init__(self, blocks: Iterable):
        object.__setattr__(self, "blocks", _coerce_coords(blocks, square=False))

    @property
    def d(self) -> int:
        return len(self.blocks)

    @property
    def shape(self) -> tuple[int, int]:
        return self.blocks[0].shape

    @classmethod
    def zeros(cls, d: int, rows: int, cols: int) -> "TangentTuple":
        return cls([np.zeros((rows, cols)) for _ in range(d)])

    def horizontal(self) -> np.ndarray:
        return np.hstack(self.blocks)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([b.flatten(order="F") for b in self.blocks])

    @classmethod
    def from_vector(cls, v: np.ndarray, d: int, rows: int, cols: int) -> "TangentTuple":
        v = np.asarray(v, dtype=np.complex128).reshape(-1)
        if v.size != d * rows * cols:
            raise DimensionMismatchError(f"vector has {v.size} entries, expected {d * rows * cols}")
        size = rows * cols
        return cls([v[j * size : (j + 1) * size].reshape((rows, cols), order="F") for j in range(d)])

    def frob_norm(self) -> float:
        return float(np.sqrt(sum(np.linalg.norm(b) ** 2 for b in self.blocks)))

    def __add__(self, other: "TangentTuple") -> "TangentTuple":
        _check_same_shape(self, other)
        return TangentTuple([a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other: "TangentTuple") -> "TangentTuple":
        _check_same_shape(self, other)
        return TangentTuple([a - b for a, b in zip(self.blocks, other.blocks)])

    def __mul__(self, scalar) -> "TangentTuple":
        return TangentTuple([complex(scalar) * b for b in self.blocks])

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"TangentTuple(d={self.d}, shape={self.shape})"


def _check_same_shape(a, b) -> None:
    if not isinstance(b, type(a)):
        raise DimensionMismatchError(f"cannot combine {type(a).__name__} with {type(b).__name__}")
    parts_a = a.coords if isinstance(a, MatrixTuple) else a.blocks
    parts_b = b.coords if isinstance(b, MatrixTuple) else b.blocks
    if len(parts_a) != len(parts_b) or parts_a[0].shape != parts_b[0].shape:
        raise DimensionMismatchError(
            f"shape mismatch: d={len(parts_a)} {parts_a[0].shape} vs d={len(parts_b)} {parts_b[0].shape}"
        )


def row_norm(x: MatrixTuple | TangentTuple) -> float:
    """Largest singular value of the horizontal block ``[X_1 ... X_d]``.

    This is the norm of ``X`` as a row operator; the open ball is
    ``row_norm(X) < 1``.
    """
    return float(np.linalg.svd(x.horizontal(), compute_uv=False)[0])


def in_ball(x: MatrixTuple | TangentTuple, margin: float = 0.0) -> bool:
    """Whether ``row_norm(x) < 1 - margin`` (strict row contraction)."""
    return row_norm(x) < 1.0 - margin


def direct_sum(x: MatrixTuple, y: MatrixTuple) -> MatrixTuple:
    """Coordinatewise block-diagonal sum, a point at level ``x.n + y.n``."""
    if x.d != y.d:
        raise DimensionMismatchError(f"tuple lengths differ: {x.d} vs {y.d}")
    out = []
    for a, b in zip(x.coords, y.coords):
        block = np.zeros((x.n + y.n, x.n + y.n), dtype=np.complex128)
        block[: x.n, : x.n] = a
        block[x.n :, x.n :] = b
        out.append(block)
    return MatrixTuple(out)


def conjugate(x: MatrixTuple, s: np.ndarray, cond_limit: float = 1e12) -> MatrixTuple:
    """Coordinatewise similarity ``S^{-1} X_j S``.

    Raises :class:`DomainError` when ``S`` is singular or has condition
    number above ``cond_limit`` (the conjugation would be numerically
    meaningless).
    """
    s = as_complex_matrix(s, "similarity")
    if s.shape != (x.n, x.n):
        raise DimensionMismatchError(f"similarity has shape {s.shape}, expected {(x.n, x.n)}")
    sv = np.linalg.svd(s, compute_uv=False)
    if sv[-1] == 0 or sv[0] / sv[-1] > cond_limit:
        raise DomainError(f"similarity is singular or ill-conditioned (cond ~ {sv[0] / max(sv[-1], 1e-300):.3e})")
    return MatrixTuple([np.linalg.solve(s, c @ s) for c in x.coords])


def transpose_tuple(x: MatrixTuple) -> MatrixTuple:
    """Coordinatewise transpose (no conjugation)."""
    return MatrixTuple([c.T for c in x.coords])


def is_coisometry_direction(x: MatrixTuple, tol: ToleranceConfig = DEFAULT_TOL) -> tuple[bool, float]:
    """Test ``sum_j X_j X_j* = r I`` for some scalar ``r >= 0``.

    Returns ``(flag, r)`` where ``r`` is the best-fit scalar
    ``trace(sum_j X_j X_j*) / n`` and ``flag`` says the defect
    ``max |sum_j X_j X_j* - r I|`` is at most ``residual_tol``.
    """
    gram = sum(c @ c.conj().T for c in x.coords)
    r = float(np.trace(gram).real / x.n)
    defect = float(np.abs(gram - r * np.eye(x.n)).max())
    return defect <= tol.residual_tol, r


def random_tuple(rng: np.random.Generator, d: int, n: int, scale: float = 1.0) -> MatrixTuple:
    """Tuple of independent standard complex Gaussian matrices times ``scale``."""
    raw = rng.standard_normal((d, n, n)) + 1j * rng.standard_normal((d, n, n))
    return MatrixTuple([scale * raw[j] / np.sqrt(2) for j in range(d)])


def random_ball_point(rng: np.random.Generator, d: int, n: int, radius: float = 0.5) -> MatrixTuple:
    """Gaussian tuple rescaled to exact row norm ``radius`` (must be < 1)."""
    if not 0 <= radius < 1:
        raise DomainError(f"radius must lie in [0, 1), got {radius}")
    g = random_tuple(rng, d, n)
    rn = row_norm(g)
    if rn == 0:
        return MatrixTuple.zeros(d, n)
    return g * (radius / rn)
