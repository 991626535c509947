"""Fixed-point subspaces of origin-fixing self-maps of the ball.

The level-1 fixed directions of the derivative at 0 span a subspace V(1);
its level-n lift V(n) = V(1) (x) M_n consists of fixed points at every
level, and — this is what :func:`verify_fixed_theorem` checks numerically —
there are no others. Also here: the determinant of the derivative
compressed to the normal space, the rank (Jordan) multiplicity test at
fixed points, and the ball's distance/geodesic helpers from the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import DEFAULT_TOL, ToleranceConfig, child_rng
from .errors import DimensionMismatchError, DomainError, NumericalFailureError
from .linalg import kernel_basis, numerical_rank
from .maps import NcMap, compose, derivative_superop, eval_map, mobius
from .points import MatrixTuple, random_tuple, row_norm
from .structure import MatSpanSubspace

# Dichotomy thresholds: a point is "fixed" below the first, "moved" above
# the second; anything between is reported as ambiguous, never silently
# classified either way.
FIXED_THRESHOLD = 1e-9
NONFIXED_THRESHOLD = 1e-4
# A Newton-converged fixed point counts as lying on V(n) when its normal
# component is below this.
V_DISTANCE_TOL = 1e-7


def _check_self_map(f: NcMap) -> None:
    if f.d_in != f.d_out:
        raise DimensionMismatchError(
            f"need a self-map (d_in = d_out), got {f.d_in} -> {f.d_out}"
        )


def fixed_subspace_level1(f: NcMap, tol: ToleranceConfig = DEFAULT_TOL) -> MatSpanSubspace:
    """V(1): the fixed directions of the derivative of ``f`` at the origin.

    Requires ``f(0) = 0`` (within ``residual_tol``); for a map fixing some
    other scalar point, conjugate with
    :func:`normalize_at_scalar_fixed_point` first.
    """
    _check_self_map(f)
    zero = MatrixTuple.zeros(f.d_in, 1)
    drift = eval_map(f, zero).frob_norm()
    if drift > tol.residual_tol:
        raise DomainError(
            f"map does not fix the origin (|f(0)| = {drift:.3e}); "
            "use normalize_at_scalar_fixed_point to move a scalar fixed point to 0"
        )
    d1 = derivative_superop(f, zero)
    basis = kernel_basis(d1 - np.eye(f.d_in), tol.rank_tol)
    return MatSpanSubspace(f.d_in, basis)


@dataclass(frozen=True)
class SubspaceLift:
    """V(n) with explicit orthonormal tangent/normal bases of the vec space."""

    v1: MatSpanSubspace
    n: int
    tangent_basis: np.ndarray  # (d n^2, dim(V1) n^2)
    normal_basis: np.ndarray  # (d n^2, (d - dim(V1)) n^2)

    @property
    def normal_dim(self) -> int:
        return self.normal_basis.shape[1]

    def contains(self, z: MatrixTuple, tol: float = V_DISTANCE_TOL) -> bool:
        return self.v1.normal_distance(z) <= tol


def lift_subspace(v1: MatSpanSubspace, n: int) -> SubspaceLift:
    """Lift V(1) to level ``n``: bases for V(n) and its orthocomplement.

    In the column-stacking, coordinate-major convention the lift's basis is
    the Kronecker product of the level-1 basis with the identity on vec(M_n).
    """
    if n < 1:
        raise ValueError(f"level must be >= 1, got {n}")
    eye = np.eye(n * n)
    return SubspaceLift(
        v1,
        n,
        np.kron(v1.level1_basis, eye),
        np.kron(v1.normal_basis(), eye),
    )


@dataclass(frozen=True)
class NewtonPoint:
    point: MatrixTuple
    level: int
    residual: float
    classified_on_v: bool


@dataclass(frozen=True)
class LevelStats:
    level: int
    samples_on_v: int
    max_residual_on_v: float
    samples_off_v: int
    min_displacement_off_v: float | None
    newton_starts: int
    newton_converged: int
    newton_on_v: int
    ambiguous: int


@dataclass(frozen=True)
class FixedSubspaceReport:
    v1: MatSpanSubspace
    levels_checked: tuple[int, ...]
    level_stats: tuple[LevelStats, ...]
    counterexamples: tuple[MatrixTuple, ...]
    ambiguous_points: tuple[MatrixTuple, ...]
    newton_found: tuple[NewtonPoint, ...]
    seed: int

    @property
    def passed(self) -> bool:
        return not self.counterexamples


def find_fixed_points(
    f: NcMap,
    n: int,
    starts: int = 20,
    seed: int = 0,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> list[MatrixTuple]:
    """Newton search for fixed points of ``f`` at level ``n``.

    Iterates ``X += s`` with ``(Df(X) - I) s = -(f(X) - X)`` from seeded
    random interior starts, using a Tikhonov-regularized least-squares step
    when the Jacobian is numerically singular (it always is along the fixed
    subspace). Converged points (residual <= ``residual_tol``, inside the
    ball) are deduplicated by distance 1e-6 and returned in start order;
    starts that blow up or stall are dropped.
    """
    _check_self_map(f)
    found: list[MatrixTuple] = []
    d = f.d_in
    for i in range(starts):
        rng = child_rng(seed, f"find-fixed-points/n={n}", i)
        radius = rng.uniform(0.1, 0.7)
        g = random_tuple(rng, d, n)
        rn = row_norm(g)
        x = g * (radius / rn) if rn > 0 else g
        point = _newton_run(f, x, tol)
        if point is None:
            continue
        if all((point - prior).frob_norm() > 1e-6 for prior in found):
            found.append(point)
    return found


def _newton_run(f: NcMap, x: MatrixTuple, tol: ToleranceConfig) -> MatrixTuple | None:
    d, n = x.d, x.n
    for _ in range(60):
        residual_tuple = eval_map(f, x) - x
        residual = residual_tuple.frob_norm()
        if residual <= tol.residual_tol:
            return x
        jac = derivative_superop(f, x) - np.eye(d * n * n)
        rhs = -residual_tuple.to_vector()
        smallest = np.linalg.svd(jac, compute_uv=False)[-1]
        if smallest < 1e-10:
            gram = jac.conj().T @ jac + 1e-12 * np.eye(jac.shape[1])
            step = np.linalg.solve(gram, jac.conj().T @ rhs)
        else:
            step = np.linalg.solve(jac, rhs)
        if not np.all(np.isfinite(step)):
            return None
        step_norm = float(np.linalg.norm(step))
        if step_norm < 1e-15:
            return None  # stalled short of convergence
        candidate = MatrixTuple.from_vector(x.to_vector() + step, d, n)
        shrink = 0
        while row_norm(candidate) >= 0.95 * f.domain_radius and shrink < 40:
            step *= 0.5
            candidate = MatrixTuple.from_vector(x.to_vector() + step, d, n)
            shrink += 1
        if shrink == 40:
            return None
        x = candidate
    return None


def verify_fixed_theorem(
    f: NcMap,
    levels: Sequence[int],
    samples: int,
    seed: int = 0,
    tol: ToleranceConfig = DEFAULT_TOL,
    newton_starts: int = 20,
) -> FixedSubspaceReport:
    """Check, at the given levels, that the fixed set of ``f`` is exactly V(n).

    Per level: points sampled inside V(n) must be fixed (residual tracked),
    points with a forced normal component must move (displacement tracked),
    and every Newton-converged fixed point must classify into V(n).
    Counterexamples collect any violation; points whose displacement falls
    in the open gap between the fixed/moved thresholds are reported as
    ambiguous rather than classified.
    """
    v1 = fixed_subspace_level1(f, tol)
    d = f.d_in
    counterexamples: list[MatrixTuple] = []
    ambiguous: list[MatrixTuple] = []
    newton_found: list[NewtonPoint] = []
    stats: list[LevelStats] = []

    for n in levels:
        normal_dim = (d - v1.dim) * n * n
        max_residual_on_v = 0.0
        for i in range(samples):
            rng = child_rng(seed, f"verify/on-v/level={n}", i)
            x = _sample_on_v(v1, d, n, rng, low=0.1, high=0.8)
            residual = (eval_map(f, x) - x).frob_norm()
            max_residual_on_v = max(max_residual_on_v, residual)
            if residual > tol.residual_tol:
                counterexamples.append(x)

        min_displacement: float | None = None
        off_count = 0
        level_ambiguous = 0
        if normal_dim > 0:
            for i in range(samples):
                rng = child_rng(seed, f"verify/off-v/level={n}", i)
                x = _sample_off_v(v1, d, n, rng)
                displacement = (eval_map(f, x) - x).frob_norm()
                off_count += 1
                min_displacement = (
                    displacement
                    if min_displacement is None
                    else min(min_displacement, displacement)
                )
                if displacement <= FIXED_THRESHOLD:
                    counterexamples.append(x)
                elif displacement < NONFIXED_THRESHOLD:
                    ambiguous.append(x)
                    level_ambiguous += 1

        converged = find_fixed_points(f, n, starts=newton_starts, seed=seed, tol=tol)
        on_v_count = 0
        for point in converged:
            residual = (eval_map(f, point) - point).frob_norm()
            on_v = v1.normal_distance(point) <= V_DISTANCE_TOL
            if on_v:
                on_v_count += 1
            else:
                counterexamples.append(point)
            newton_found.append(NewtonPoint(point, n, residual, on_v))

        stats.append(
            LevelStats(
                level=n,
                samples_on_v=samples,
                max_residual_on_v=max_residual_on_v,
                samples_off_v=off_count,
                min_displacement_off_v=min_displacement,
                newton_starts=newton_starts,
                newton_converged=len(converged),
                newton_on_v=on_v_count,
                ambiguous=level_ambiguous,
            )
        )

    return FixedSubspaceReport(
        v1=v1,
        levels_checked=tuple(levels),
        level_stats=tuple(stats),
        counterexamples=tuple(counterexamples),
        ambiguous_points=tuple(ambiguous),
        newton_found=tuple(newton_found),
        seed=seed,
    )


def _sample_on_v(
    v1: MatSpanSubspace, d: int, n: int, rng: np.random.Generator, low: float, high: float
) -> MatrixTuple:
    g = random_tuple(rng, d, n)
    projected = v1.project(g)
    rn = row_norm(projected)
    target = rng.uniform(low, high)
    if rn < 1e-14:
        return MatrixTuple.zeros(d, n)
    return projected * (target / rn)


def _sample_off_v(v1: MatSpanSubspace, d: int, n: int, rng: np.random.Generator) -> MatrixTuple:
    # Tangent part kept below row norm 0.6 so that adding a normal part of
    # Frobenius norm <= 0.3 cannot leave the open ball.
    base = _sample_on_v(v1, d, n, rng, low=0.1, high=0.6)
    g = random_tuple(rng, d, n)
    normal = g - v1.project(g)
    norm = normal.frob_norm()
    target = rng.uniform(0.1, 0.3)
    normal = normal * (target / norm)
    return base + normal


@dataclass(frozen=True)
class NormalCompression:
    """Derivative-minus-identity compressed to the normal space of V(n) at X."""

    x: MatrixTuple = field(repr=False)
    q_matrix: np.ndarray = field(repr=False)
    q: complex
    block_residual: float

    @property
    def normal_dim(self) -> int:
        return self.q_matrix.shape[0]


def normal_compression(
    f: NcMap,
    v1: MatSpanSubspace,
    x: MatrixTuple,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> NormalCompression:
    """Compress ``Df(X) - I`` to the normal space of V(n) at ``X in V(n)``.

    ``q`` is the determinant of the compression (1 when the normal space is
    zero-dimensional). The expected block-triangular structure — V(n) is
    pointwise fixed, so the derivative maps tangent directions to themselves
    — is verified; its defect is returned as ``block_residual``.
    """
    _check_self_map(f)
    if v1.normal_distance(x) > tol.residual_tol:
        raise DomainError(
            f"base point is not in V(n) (normal distance {v1.normal_distance(x):.3e})"
        )
    drift = (eval_map(f, x) - x).frob_norm()
    if drift > tol.residual_tol:
        raise DomainError(f"base point is not fixed by the map (|f(X) - X| = {drift:.3e})")
    lift = lift_subspace(v1, x.n)
    deriv = derivative_superop(f, x)
    if lift.tangent_basis.shape[1]:
        tangent_defect = deriv @ lift.tangent_basis - lift.tangent_basis
        block_residual = float(np.abs(tangent_defect).max())
    else:
        block_residual = 0.0
    if block_residual > tol.residual_tol:
        raise NumericalFailureError(
            f"derivative does not fix the tangent space (defect {block_residual:.3e})"
        )
    bn = lift.normal_basis
    q_matrix = bn.conj().T @ (deriv - np.eye(deriv.shape[0])) @ bn
    q = complex(np.linalg.det(q_matrix)) if q_matrix.size else 1.0 + 0.0j
    return NormalCompression(x, q_matrix, q, block_residual)


def jordan_multiplicity_check(
    f: NcMap, x: MatrixTuple, tol: ToleranceConfig = DEFAULT_TOL
) -> bool:
    """Rank test ``rank(D - I) == rank((D - I)^2)`` at a fixed point.

    Equality says the eigenvalue 1 of the derivative has equal geometric and
    algebraic multiplicities; it must hold at every genuine fixed point of a
    ball self-map.
    """
    _check_self_map(f)
    drift = (eval_map(f, x) - x).frob_norm()
    if drift > tol.residual_tol:
        raise DomainError(f"point is not fixed (|f(X) - X| = {drift:.3e})")
    j = derivative_superop(f, x) - np.eye(f.d_in * x.n * x.n)
    return numerical_rank(j, tol.rank_tol) == numerical_rank(j @ j, tol.rank_tol)


def caratheodory_distance0(x: MatrixTuple) -> float:
    """Caratheodory distance from the origin: ``arctanh(row_norm(X))``.

    Convention: the Poincare distance from 0 to t in the disc is
    ``arctanh t`` (no factor 2).
    """
    rn = row_norm(x)
    if rn >= 1:
        raise DomainError(f"point is outside the open ball (row_norm = {rn:.6g})")
    return math.atanh(rn)


def geodesic_from_origin(x: MatrixTuple, z: complex) -> MatrixTuple:
    """The point ``z * X / row_norm(X)`` on the complex geodesic through ``X``."""
    rn = row_norm(x)
    if rn == 0:
        raise DomainError("the zero tuple spans no geodesic direction")
    z = complex(z)
    if abs(z) >= 1:
        raise DomainError(f"geodesic parameter must satisfy |z| < 1, got |z| = {abs(z):.6g}")
    return x * (z / rn)


def normalize_at_scalar_fixed_point(
    f: NcMap, a: Sequence[complex], tol: ToleranceConfig = DEFAULT_TOL
) -> NcMap:
    """Conjugate ``f`` by the automorphism exchanging 0 and its fixed point ``a``.

    The result fixes the origin, and ``X`` is fixed by ``f`` exactly when
    ``Theta_a(X)`` is fixed by the result. For ``a = 0`` the map is returned
    unchanged.
    """
    _check_self_map(f)
    a = np.atleast_1d(np.asarray(a, dtype=np.complex128))
    if a.size != f.d_in:
        raise DimensionMismatchError(f"a has d={a.size}, map has d={f.d_in}")
    if float(np.linalg.norm(a)) >= 1:
        raise ValueError(f"scalar point must be in the ball, got |a| = {np.linalg.norm(a):.6g}")
    scalar = MatrixTuple.from_scalar_point(a, 1)
    drift = (eval_map(f, scalar) - scalar).frob_norm()
    if drift > tol.residual_tol:
        raise DomainError(f"a is not a fixed point of the map (|f(a) - a| = {drift:.3e})")
    if not a.any():
        return f
    theta = mobius(a)
    return compose(theta, compose(f, theta))
