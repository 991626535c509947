import numpy as np
import pytest

from freeball.config import child_rng
from freeball.errors import DimensionMismatchError, DomainError
from freeball.points import (
    MatrixTuple,
    TangentTuple,
    conjugate,
    direct_sum,
    in_ball,
    is_coisometry_direction,
    random_ball_point,
    random_tuple,
    row_norm,
    transpose_tuple,
)


def test_vectorization_is_column_major_coordinate_major():
    x = MatrixTuple([np.array([[1.0, 3.0], [2.0, 4.0]]), np.array([[5.0, 7.0], [6.0, 8.0]])])
    v = x.to_vector()
    assert np.abs(v - np.arange(1.0, 9.0)).max() < 1e-15
    back = MatrixTuple.from_vector(v, 2, 2)
    for a, b in zip(x.coords, back.coords):
        assert np.abs(a - b).max() == 0


def test_vec_kron_identity():
    # vec(A X B) = (B^T kron A) vec(X) in the column-stacking convention.
    rng = child_rng(3, "points/kron")
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    b = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    lhs = (a @ x @ b).flatten(order="F")
    rhs = np.kron(b.T, a) @ x.flatten(order="F")
    assert np.abs(lhs - rhs).max() < 1e-12


def test_row_norm_is_top_singular_value_of_row():
    rng = child_rng(3, "points/rownorm")
    x = random_tuple(rng, 3, 4)
    assert abs(row_norm(x) - np.linalg.norm(x.horizontal(), 2)) < 1e-12


def test_random_ball_point_hits_requested_radius():
    rng = child_rng(3, "points/radius")
    x = random_ball_point(rng, 2, 3, radius=0.37)
    assert abs(row_norm(x) - 0.37) < 1e-12
    assert in_ball(x)
    assert in_ball(x, margin=0.5)
    assert not in_ball(x, margin=0.7)
    with pytest.raises(DomainError):
        random_ball_point(rng, 2, 3, radius=1.0)


def test_direct_sum_blocks_and_norm():
    rng = child_rng(3, "points/dsum")
    x = random_ball_point(rng, 2, 2, radius=0.3)
    y = random_ball_point(rng, 2, 3, radius=0.6)
    s = direct_sum(x, y)
    assert s.n == 5
    for sj, xj, yj in zip(s.coords, x.coords, y.coords):
        assert np.abs(sj[:2, :2] - xj).max() < 1e-15
        assert np.abs(sj[2:, 2:] - yj).max() < 1e-15
        assert np.abs(sj[:2, 2:]).max() == 0
        assert np.abs(sj[2:, :2]).max() == 0
    assert abs(row_norm(s) - 0.6) < 1e-12


def test_conjugate_by_unitary_preserves_row_norm():
    rng = child_rng(3, "points/conj")
    x = random_ball_point(rng, 2, 3, radius=0.5)
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
    y = conjugate(x, q)
    assert abs(row_norm(y) - row_norm(x)) < 1e-12
    # S^{-1} X S with S = q
    for yj, xj in zip(y.coords, x.coords):
        assert np.abs(yj - q.conj().T @ xj @ q).max() < 1e-12


def test_conjugate_rejects_singular_similarity():
    x = MatrixTuple.zeros(2, 2)
    with pytest.raises(DomainError):
        conjugate(x, np.zeros((2, 2)))
    with pytest.raises(DimensionMismatchError):
        conjugate(x, np.eye(3))


def test_from_scalar_point_is_ampliation():
    x = MatrixTuple.from_scalar_point([0.2, -0.1j], n=3)
    assert x.d == 2 and x.n == 3
    assert np.abs(x.coords[0] - 0.2 * np.eye(3)).max() == 0
    assert np.abs(x.coords[1] + 0.1j * np.eye(3)).max() == 0


def test_tuple_arithmetic():
    rng = child_rng(3, "points/arith")
    x = random_tuple(rng, 2, 2)
    y = random_tuple(rng, 2, 2)
    z = (x + y) - y
    assert (z - x).frob_norm() < 1e-12
    w = 2.0 * x - x * 2.0
    assert w.frob_norm() == 0
    assert ((-x) + x).frob_norm() == 0
    with pytest.raises(DimensionMismatchError):
        x + random_tuple(rng, 2, 3)
    with pytest.raises(DimensionMismatchError):
        x + random_tuple(rng, 3, 2)


def test_tangent_round_trip_rectangular():
    rng = child_rng(3, "points/tangent")
    t = TangentTuple([rng.standard_normal((2, 3)) for _ in range(2)])
    assert t.shape == (2, 3)
    v = t.to_vector()
    assert v.size == 2 * 2 * 3
    back = TangentTuple.from_vector(v, 2, 2, 3)
    assert (t - back).frob_norm() == 0


def test_coisometry_direction_detector():
    c = 0.4
    x = MatrixTuple([np.array([[0, c], [0, 0]]), np.array([[0, 0], [c, 0]])])
    flag, r = is_coisometry_direction(x)
    assert flag
    assert abs(r - c * c) < 1e-12
    rng = child_rng(3, "points/cois")
    flag, _ = is_coisometry_direction(random_tuple(rng, 2, 2))
    assert not flag


def test_transpose_tuple():
    rng = child_rng(3, "points/transpose")
    x = random_tuple(rng, 2, 3)
    t = transpose_tuple(x)
    for a, b in zip(x.coords, t.coords):
        assert np.abs(a.T - b).max() == 0


def test_ragged_coords_rejected():
    with pytest.raises(DimensionMismatchError):
        MatrixTuple([np.zeros((2, 2)), np.zeros((3, 3))])
    with pytest.raises(DimensionMismatchError):
        MatrixTuple([np.zeros((2, 3))])
    with pytest.raises(DimensionMismatchError):
        MatrixTuple.from_vector(np.zeros(7), 2, 2)
