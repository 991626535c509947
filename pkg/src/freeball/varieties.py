"""Polynomial subvarieties of the ball and their structural reports.

A variety is cut out by free polynomial relations; membership at level n
means every relation evaluates to (numerically) zero. The report at the end
checks the two hypotheses that make such a variety rigid enough to classify:
existence of a scalar point, and fullness of the matrix span at some level.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import DEFAULT_TOL, ToleranceConfig, child_rng
from .errors import DimensionMismatchError
from .linalg import numerical_rank
from .maps import PolynomialMap
from .points import MatrixTuple, random_ball_point, row_norm
from .polynomials import FreePolynomial, eval_poly, parse_polynomial
from .structure import MatSpanSubspace, mat_span


@dataclass(frozen=True)
class VarietySpec:
    """Relations cutting out a subvariety of the d-ball."""

    d: int
    relations: tuple[FreePolynomial, ...]
    name: str | None = None

    def __post_init__(self):
        if not self.relations:
            raise ValueError("a variety needs at least one relation")
        worst = max(p.d for p in self.relations)
        if worst > self.d:
            raise DimensionMismatchError(f"relations use x{worst} but d={self.d}")
        object.__setattr__(
            self, "relations", tuple(p.with_d(self.d) for p in self.relations)
        )


_BUILTIN_FIXTURES: dict[str, tuple] = {}


def builtin_variety(name: str) -> VarietySpec:
    """Named d = 2 example varieties.

    ``commutator-half``: XY - YX - Y/2. ``q-commutation(q)``: XY - q YX for
    a (real or complex) literal q. ``fermionic-half``: X^2, Y^2,
    XY + YX - 1/2.
    """
    if name == "commutator-half":
        return VarietySpec(2, (parse_polynomial("x1*x2 - x2*x1 - 0.5*x2"),), name)
    if name == "fermionic-half":
        return VarietySpec(
            2,
            (
                parse_polynomial("x1^2"),
                parse_polynomial("x2^2"),
                parse_polynomial("x1*x2 + x2*x1 - 0.5"),
            ),
            name,
        )
    match = re.fullmatch(r"q-commutation\((.+)\)", name)
    if match:
        token = match.group(1).strip().replace(" ", "")
        try:
            q = complex(token)
        except ValueError:
            raise ValueError(f"malformed q in {name!r}") from None
        x1, x2 = FreePolynomial.variable(1, 2), FreePolynomial.variable(2, 2)
        return VarietySpec(2, (x1 * x2 - q * (x2 * x1),), name)
    raise ValueError(
        f"unknown variety {name!r}; expected commutator-half, fermionic-half, "
        "or q-commutation(q)"
    )


def builtin_fixture(name: str) -> MatrixTuple | None:
    """The level-2 anchor point shipped with a builtin variety, if any."""
    if name == "commutator-half":
        return MatrixTuple([np.diag([0.5, 0.0]), np.array([[0, 0.5], [0, 0]])])
    if name == "fermionic-half":
        s = 1 / np.sqrt(2)
        return MatrixTuple([np.array([[0, s], [0, 0]]), np.array([[0, 0], [s, 0]])])
    match = re.fullmatch(r"q-commutation\((.+)\)", name or "")
    if match:
        q = complex(match.group(1).strip().replace(" ", ""))
        if abs(q) < 1e-12:
            return None
        point = MatrixTuple([np.diag([0.5, 0.5 / q]), np.array([[0, 0.5], [0, 0]])])
        return point if row_norm(point) < 1 else None
    return None


def on_variety(
    v: VarietySpec, x: MatrixTuple, tol: float = DEFAULT_TOL.residual_tol
) -> tuple[bool, float]:
    """Whether all relations vanish at ``x``; returns the worst residual too."""
    if x.d != v.d:
        raise DimensionMismatchError(f"point has d={x.d}, variety has d={v.d}")
    worst = max(float(np.linalg.norm(eval_poly(p, x))) for p in v.relations)
    return worst <= tol, worst


def _relation_system(v: VarietySpec) -> PolynomialMap:
    return PolynomialMap(v.relations, d_in=v.d)


def _newton_to_variety(
    system: PolynomialMap, x: MatrixTuple, max_iter: int = 60
) -> MatrixTuple | None:
    """Gauss-Newton toward the zero set of the stacked relation system.

    Bails out early when iterates stall (inconsistent systems settle at a
    nonzero local minimum) or wander far outside the ball.
    """
    d, n = x.d, x.n
    previous = float("inf")
    stalled = 0
    for _ in range(max_iter):
        values = system._evaluate(x)
        residual = values.frob_norm()
        if residual <= 1e-12:
            return x
        if residual > previous * (1 - 1e-3):
            stalled += 1
            if stalled >= 3:
                break
        else:
            stalled = 0
        previous = residual
        jac = system._derivative(x)
        step, *_ = np.linalg.lstsq(jac, -values.to_vector(), rcond=None)
        if not np.all(np.isfinite(step)):
            return None
        x = MatrixTuple.from_vector(x.to_vector() + step, d, n)
        if row_norm(x) > 4.0:
            return None
    values = system._evaluate(x)
    if values.frob_norm() <= 1e-10:
        return x
    return None


@dataclass(frozen=True)
class ScalarPointSearch:
    """Level-1 solutions inside the ball, with a non-isolatedness flag."""

    points: tuple[np.ndarray, ...]
    positive_dimensional: bool


def scalar_points(
    v: VarietySpec, seed: int = 0, tol: ToleranceConfig = DEFAULT_TOL
) -> ScalarPointSearch:
    """Search the level-1 (scalar) points of the variety inside the ball.

    Newton from a deterministic real grid crossed with seeded imaginary
    perturbations. The ``positive_dimensional`` flag is set when some
    solution has a rank-deficient Jacobian (the solution set is not
    isolated there); in that case the returned points are samples, not an
    exhaustive list. At most 60 points are kept, in search order.
    """
    system = _relation_system(v)
    per_axis = {1: 21, 2: 21, 3: 9, 4: 5}.get(v.d, 5)
    axis = np.linspace(-0.9, 0.9, per_axis)
    grid = np.stack(np.meshgrid(*([axis] * v.d), indexing="ij"), axis=-1).reshape(-1, v.d)
    accepted: list[np.ndarray] = []
    positive_dimensional = False
    for node_index, node in enumerate(grid):
        for jitter_index in range(5):
            rng = child_rng(seed, f"scalar-points/node={node_index}", jitter_index)
            start = node.astype(np.complex128)
            if jitter_index > 0:
                start = start + 1j * rng.uniform(-0.2, 0.2, size=v.d)
            x = MatrixTuple([np.array([[val]]) for val in start])
            solution = _newton_to_variety(system, x)
            if solution is None:
                continue
            vec = np.array([c[0, 0] for c in solution.coords])
            if np.linalg.norm(vec) >= 1:
                continue
            if any(np.linalg.norm(vec - prior) <= 1e-6 for prior in accepted):
                continue
            jac = system._derivative(solution)
            if numerical_rank(jac, 1e-6) < v.d:
                positive_dimensional = True
            if len(accepted) < 60:
                accepted.append(vec)
    return ScalarPointSearch(tuple(accepted), positive_dimensional)


def sample_level_n(
    v: VarietySpec,
    n: int,
    count: int,
    seed: int = 0,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> list[MatrixTuple]:
    """Sample points of the variety at level ``n`` inside the ball.

    Gauss-Newton on the stacked relation system from random interior
    starts; deduplicated, deterministic in the seed, at most ``count``
    points (a warning is issued if the start budget runs out first). For a
    builtin variety at n = 2 the shipped fixture point leads the list.
    """
    system = _relation_system(v)
    found: list[MatrixTuple] = []
    if v.name and n == 2:
        fixture = builtin_fixture(v.name)
        if fixture is not None:
            found.append(fixture)
    budget = 4 * count
    for i in range(budget):
        if len(found) >= count:
            break
        rng = child_rng(seed, f"variety-sample/n={n}", i)
        start = random_ball_point(rng, v.d, n, radius=rng.uniform(0.2, 0.7))
        solution = _newton_to_variety(system, start)
        if solution is None or row_norm(solution) >= 0.98:
            continue
        if all((solution - prior).frob_norm() > 1e-6 for prior in found):
            found.append(solution)
    if len(found) < count:
        warnings.warn(
            f"variety sampler found {len(found)}/{count} points at level {n}",
            RuntimeWarning,
            stacklevel=2,
        )
    return found[:count]


@dataclass(frozen=True)
class LevelSpan:
    level: int
    dim: int
    full: bool
    points_used: int


@dataclass(frozen=True)
class VarietyReport:
    """Empirical check of the scalar-point and full-mat-span hypotheses."""

    scalar: ScalarPointSearch
    matspan_per_level: tuple[LevelSpan, ...]
    hypothesis_ok: bool

    @property
    def scalar_points_found(self) -> tuple[np.ndarray, ...]:
        return self.scalar.points


def variety_hypothesis_report(
    v: VarietySpec,
    max_level: int = 3,
    seed: int = 0,
    tol: ToleranceConfig = DEFAULT_TOL,
    samples_per_level: int = 10,
) -> VarietyReport:
    """Scalar-point search plus per-level mat-span dimensions of samples."""
    if max_level > 4:
        raise ValueError(f"max_level must be <= 4 at desk scale, got {max_level}")
    scalar = scalar_points(v, seed, tol)
    spans: list[LevelSpan] = []
    for level in range(1, max_level + 1):
        points = sample_level_n(v, level, samples_per_level, seed=seed, tol=tol)
        if not points:
            spans.append(LevelSpan(level, 0, False, 0))
            continue
        subspace: MatSpanSubspace = mat_span(points, tol.rank_tol)
        spans.append(LevelSpan(level, subspace.dim, subspace.is_full, len(points)))
    hypothesis_ok = bool(scalar.points) and any(s.full for s in spans)
    return VarietyReport(scalar, tuple(spans), hypothesis_ok)
