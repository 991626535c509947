import itertools

import numpy as np
import pytest

from freeball.config import child_rng
from freeball.errors import DimensionMismatchError, ParseError
from freeball.points import MatrixTuple, random_ball_point, random_tuple
from freeball.polynomials import (
    FreePolynomial,
    eval_poly,
    eval_word,
    format_polynomial,
    parse_polynomial,
    szego_kernel_truncated,
)


def test_product_is_noncommutative():
    x1 = FreePolynomial.variable(1, 2)
    x2 = FreePolynomial.variable(2, 2)
    p = (x1 + x2) ** 2
    assert p.coefficient((1, 1)) == 1
    assert p.coefficient((1, 2)) == 1
    assert p.coefficient((2, 1)) == 1
    assert p.coefficient((2, 2)) == 1
    q = x1 * x2 - x2 * x1
    assert not q.is_zero()
    assert q.degree == 2


def test_algebra_with_scalars():
    x1 = FreePolynomial.variable(1, 1)
    p = 2 * x1 + 1 - x1 * 3
    assert p.coefficient(()) == 1
    assert p.coefficient((1,)) == -1
    assert (p - p).is_zero()
    assert (x1**0).coefficient(()) == 1
    with pytest.raises(ValueError):
        x1 ** (-1)


def test_eval_matches_manual_matrices():
    rng = child_rng(11, "poly/eval")
    x = random_tuple(rng, 2, 3)
    a, b = x.coords
    p = parse_polynomial("x1*x2 - x2*x1 - 0.5*x2")
    expected = a @ b - b @ a - 0.5 * b
    assert np.abs(eval_poly(p, x) - expected).max() < 1e-12
    assert np.abs(eval_word((), x) - np.eye(3)).max() == 0
    assert np.abs(eval_word((2, 1, 1), x) - b @ a @ a).max() < 1e-12


def test_eval_rejects_missing_variables():
    p = parse_polynomial("x3")
    x = MatrixTuple.zeros(2, 2)
    with pytest.raises(DimensionMismatchError):
        eval_poly(p, x)


@pytest.mark.parametrize(
    "text",
    [
        "x1",
        "x1*x2 - x2*x1 - 0.5*x2",
        "x1^2 + x2^2",
        "2j*x1 - (1 - 0.5j)*x2*x1*x2",
        "(x1 + x2)^3 - 1e-3",
        "-x1 + +x2",
        "0.5 + 0.5*x1",
    ],
)
def test_parse_format_round_trip(text):
    p = parse_polynomial(text)
    q = parse_polynomial(format_polynomial(p))
    diff = p - q
    assert all(abs(c) < 1e-12 for c in diff.terms.values())


def test_parse_accepts_i_suffix():
    p = parse_polynomial("2i*x1")
    assert p.coefficient((1,)) == 2j


@pytest.mark.parametrize(
    "text",
    ["", "x1 * * x2", "2 x1", "(x1", "x0", "x", "x1 @ x2", "1..2"],
)
def test_parse_errors_carry_positions(text):
    with pytest.raises(ParseError) as err:
        parse_polynomial(text)
    assert err.value.position is not None
    assert 0 <= err.value.position <= len(text)


def test_parse_respects_declared_d():
    with pytest.raises(ParseError):
        parse_polynomial("x3", d=2)
    p = parse_polynomial("x1", d=3)
    assert p.d == 3


def test_szego_scalar_geometric_series():
    z = MatrixTuple([np.array([[0.3 + 0.1j]])])
    w = MatrixTuple([np.array([[0.5 - 0.2j]])])
    zw = (0.3 + 0.1j) * np.conj(0.5 - 0.2j)
    limit = 1.0 / (1.0 - zw)
    t = np.eye(1)
    for order in range(25):
        total, tail = szego_kernel_truncated(z, w, t, order)
        err = abs(total[0, 0] - limit)
        assert err <= tail + 1e-15
    _, tail = szego_kernel_truncated(z, w, t, 40)
    assert tail < 1e-12


def test_szego_matches_word_enumeration():
    rng = child_rng(11, "poly/szego")
    z = random_ball_point(rng, 2, 2, radius=0.4)
    w = random_ball_point(rng, 2, 3, radius=0.5)
    t = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
    order = 3
    brute = np.zeros((2, 3), dtype=complex)
    for length in range(order + 1):
        for word in itertools.product((1, 2), repeat=length):
            brute += eval_word(word, z) @ t @ eval_word(word, w).conj().T
    total, tail = szego_kernel_truncated(z, w, t, order)
    assert np.abs(total - brute).max() < 1e-12
    assert np.isfinite(tail)


def test_szego_tail_infinite_when_product_too_large():
    z = MatrixTuple([np.array([[0.9]]), np.array([[0.0]])])
    w = MatrixTuple([np.array([[0.9]]), np.array([[0.0]])])
    total, tail = szego_kernel_truncated(z, w, np.eye(1), 2)
    assert np.isfinite(total).all()
    assert tail == np.inf


def test_poly_repr_uses_text_format():
    p = parse_polynomial("x1*x2")
    assert "x1*x2" in repr(p)
