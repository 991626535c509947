import numpy as np
import pytest

from freeball.config import child_rng
from freeball.errors import DimensionMismatchError, DomainError
from freeball.linalg import (
    hermitian_sqrt,
    kernel_basis,
    numerical_rank,
    orthonormal_columns,
    orthonormal_complement,
    principal_angles,
    subspaces_equal,
)


def _crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_numerical_rank_and_kernel():
    rng = child_rng(7, "linalg/rank")
    a = _crandn(rng, 5, 3)
    m = np.hstack([a, a @ _crandn(rng, 3, 2)])  # 5x5, rank 3
    assert numerical_rank(m) == 3
    k = kernel_basis(m)
    assert k.shape == (5, 2)
    assert np.abs(m @ k).max() < 1e-10
    assert np.abs(k.conj().T @ k - np.eye(2)).max() < 1e-12


def test_kernel_of_full_rank_matrix_is_empty():
    rng = child_rng(7, "linalg/full")
    m = _crandn(rng, 4, 4)
    assert numerical_rank(m) == 4
    assert kernel_basis(m).shape == (4, 0)


def test_orthonormal_columns_spans_same_space():
    rng = child_rng(7, "linalg/orth")
    a = _crandn(rng, 6, 3)
    m = np.hstack([a, a[:, :1] + a[:, 1:2], 2 * a])  # still rank 3
    q = orthonormal_columns(m)
    assert q.shape == (6, 3)
    assert np.abs(q.conj().T @ q - np.eye(3)).max() < 1e-12
    assert subspaces_equal(q, orthonormal_columns(a))


def test_orthonormal_complement():
    basis = np.eye(3)[:, :1]
    comp = orthonormal_complement(basis, 3)
    assert comp.shape == (3, 2)
    assert np.abs(basis.conj().T @ comp).max() < 1e-12
    full = np.hstack([basis, comp])
    assert np.abs(full.conj().T @ full - np.eye(3)).max() < 1e-12


def test_principal_angles():
    rng = child_rng(7, "linalg/angles")
    a = orthonormal_columns(_crandn(rng, 5, 2))
    assert np.abs(principal_angles(a, a)).max() < 1e-7
    b = orthonormal_complement(a, 5)[:, :2]
    assert principal_angles(a, b).min() > np.pi / 2 - 1e-7


def test_subspaces_equal_rejects_different_spans():
    rng = child_rng(7, "linalg/neq")
    a = orthonormal_columns(_crandn(rng, 5, 2))
    b = orthonormal_columns(_crandn(rng, 5, 2))
    assert not subspaces_equal(a, b)
    assert not subspaces_equal(a, orthonormal_columns(_crandn(rng, 5, 3)))


def test_hermitian_sqrt_squares_back():
    rng = child_rng(7, "linalg/sqrt")
    b = _crandn(rng, 4, 4)
    a = b @ b.conj().T
    s = hermitian_sqrt(a)
    assert np.abs(s @ s - a).max() < 1e-10
    assert np.abs(s - s.conj().T).max() < 1e-12
    assert np.linalg.eigvalsh(s).min() > -1e-12


def test_hermitian_sqrt_rejects_bad_input():
    rng = child_rng(7, "linalg/sqrt-bad")
    with pytest.raises(DomainError):
        hermitian_sqrt(_crandn(rng, 3, 3))  # not Hermitian
    with pytest.raises(DomainError):
        hermitian_sqrt(np.diag([1.0, -1.0]))  # not PSD
    with pytest.raises(DimensionMismatchError):
        hermitian_sqrt(np.zeros((2, 3)))
