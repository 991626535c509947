import numpy as np
import pytest

from freeball.config import child_rng
from freeball.errors import DimensionMismatchError, DomainError
from freeball.points import MatrixTuple, conjugate, random_ball_point, random_tuple
from freeball.structure import (
    in_mat_span,
    invariant_subspace_witness,
    is_generic,
    jordan_holder,
    linear_relations,
    mat_span,
    reassemble,
    subdiagonal_defect,
)


def test_linear_relations_detects_dependent_coordinate():
    rng = child_rng(29, "structure/relations")
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    b = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    x = MatrixTuple([a, b, a + 2 * b])
    rel = linear_relations(x)
    assert rel.dim == 1
    assert rel.residual(x) < 1e-12
    alpha = rel.basis[:, 0]
    expected = np.array([1.0, 2.0, -1.0])
    expected = expected / np.linalg.norm(expected)
    assert abs(abs(np.vdot(alpha, expected)) - 1.0) < 1e-12


def test_linear_relations_empty_for_independent_coordinates():
    rng = child_rng(29, "structure/norel")
    x = random_tuple(rng, 3, 2)
    assert linear_relations(x).dim == 0


def test_mat_span_single_point_matches_rank_one_probes():
    # For one point, V(1) is spanned by the vectors (t^T X_1 s, ..., t^T X_d s).
    rng = child_rng(29, "structure/matspan")
    for d, n in [(2, 2), (3, 2), (4, 3)]:
        x = random_ball_point(rng, d, n, radius=0.7)
        v = mat_span([x])
        probes = []
        for _ in range(3 * d * n * n):
            t = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            s = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            probes.append(np.array([t @ c @ s for c in x.coords]))
        probe_matrix = np.column_stack(probes)
        assert np.linalg.matrix_rank(probe_matrix, tol=1e-8) == v.dim
        # every probe lies inside V(1)
        basis = v.level1_basis
        residual = probe_matrix - basis @ (basis.conj().T @ probe_matrix)
        assert np.abs(residual).max() < 1e-8


def test_mat_span_membership_and_projection():
    x = MatrixTuple([np.diag([0.5, 0.2]), np.zeros((2, 2))])
    v = mat_span([x])
    assert v.dim == 1
    z = MatrixTuple([np.ones((2, 2)) * 0.1, np.zeros((2, 2))])
    assert in_mat_span(v, z)
    w = MatrixTuple([np.zeros((2, 2)), np.ones((2, 2)) * 0.1])
    assert not in_mat_span(v, w)
    assert v.normal_distance(w) > 0.1
    projected = v.project(w)
    assert projected.frob_norm() < 1e-12
    assert v.normal_distance(v.project(z)) < 1e-12


def test_mat_span_of_several_points_joins_their_spans():
    e1 = MatrixTuple([np.eye(2) * 0.3, np.zeros((2, 2))])
    e2 = MatrixTuple([np.zeros((2, 2)), np.eye(2) * 0.3])
    v = mat_span([e1, e2])
    assert v.dim == 2
    assert v.is_full
    with pytest.raises(DomainError):
        mat_span([])
    with pytest.raises(DimensionMismatchError):
        mat_span([e1, MatrixTuple.zeros(3, 2)])


def test_is_generic_on_random_and_structured_tuples():
    rng = child_rng(29, "structure/generic")
    x = random_ball_point(rng, 2, 3, radius=0.5)
    flag, dim = is_generic(x)
    assert flag and dim == 9
    diag = MatrixTuple([np.diag([0.3, 0.1]), np.diag([0.2, 0.4])])
    flag, dim = is_generic(diag)
    assert not flag and dim < 4
    # A single nilpotent Jordan block generates a proper subalgebra.
    jordan = MatrixTuple([np.array([[0, 1.0], [0, 0]])])
    flag, dim = is_generic(jordan)
    assert not flag and dim == 1


def test_invariant_subspace_witness_is_invariant():
    x = MatrixTuple([np.diag([0.3, 0.1, 0.5]), np.diag([0.2, 0.4, 0.1])])
    w = invariant_subspace_witness(x)
    assert w is not None
    k = w.shape[1]
    assert 1 <= k < 3
    proj = np.eye(3) - w @ w.conj().T
    for c in x.coords:
        assert np.abs(proj @ c @ w).max() < 1e-8


def test_invariant_subspace_witness_none_for_generic():
    rng = child_rng(29, "structure/witness")
    x = random_ball_point(rng, 2, 2, radius=0.5)
    assert invariant_subspace_witness(x) is None


def _triangular_fixture(rng):
    # 2x2 generic pair on top, scalar bottom, mixed upper-right coupling.
    top = random_tuple(rng, 2, 2, scale=0.4)
    out = []
    for j, tj in enumerate(top.coords):
        c = np.zeros((3, 3), dtype=complex)
        c[:2, :2] = tj
        c[2, 2] = 0.1 + 0.1 * j
        c[:2, 2:] = rng.standard_normal((2, 1))
        out.append(c)
    return MatrixTuple(out)


def test_jordan_holder_finds_the_block_structure():
    rng = child_rng(29, "structure/jh")
    x = _triangular_fixture(rng)
    decomposition = jordan_holder(x)
    assert sorted(decomposition.block_sizes) == [1, 2]
    assert subdiagonal_defect(decomposition, x) < 1e-8
    assert reassemble(decomposition, x) < 1e-8
    # the similarity is built from unitary completions
    s = decomposition.s
    assert np.abs(s @ s.conj().T - np.eye(3)).max() < 1e-10
    for block in decomposition.constituents:
        flag, _ = is_generic(block)
        assert flag or block.n == 1


def test_jordan_holder_is_similarity_invariant():
    rng = child_rng(29, "structure/jh-inv")
    x = _triangular_fixture(rng)
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
    y = conjugate(x, q)
    a = jordan_holder(x)
    b = jordan_holder(y)
    assert sorted(a.block_sizes) == sorted(b.block_sizes)
    assert subdiagonal_defect(b, y) < 1e-8


def test_jordan_holder_splits_a_jordan_block_completely():
    j = np.array([[0.3, 1.0, 0], [0, 0.3, 1.0], [0, 0, 0.3]])
    x = MatrixTuple([j])
    decomposition = jordan_holder(x)
    assert decomposition.block_sizes == (1, 1, 1)
    # a defective eigenvalue is ill-conditioned, so the constituents only
    # approximate it to a fractional power of the working precision
    for block in decomposition.constituents:
        assert abs(block.coords[0][0, 0] - 0.3) < 1e-6
    assert subdiagonal_defect(decomposition, x) < 1e-8


def test_jordan_holder_keeps_generic_input_whole():
    rng = child_rng(29, "structure/jh-gen")
    x = random_ball_point(rng, 2, 3, radius=0.5)
    decomposition = jordan_holder(x)
    assert decomposition.block_sizes == (3,)
    assert np.abs(decomposition.s - np.eye(3)).max() < 1e-12
