import numpy as np
import pytest

from freeball.config import child_rng
from freeball.errors import DimensionMismatchError, DomainError, ParseError
from freeball.maps import (
    PolynomialMap,
    ScalingMap,
    compose,
    derivative_superop,
    derivative_superop_columns,
    diff_diff,
    eval_map,
    finite_difference_derivative,
    identity_map,
    make_test_map,
    mobius,
    parse_map_spec,
)
from freeball.points import (
    MatrixTuple,
    TangentTuple,
    conjugate,
    direct_sum,
    random_ball_point,
    row_norm,
)
from freeball.polynomials import parse_polynomial


def _rng(label, i=0):
    return child_rng(17, f"maps/{label}", i)


def test_scaling_map_eval():
    f = ScalingMap([1.0, 0.5j])
    x = random_ball_point(_rng("scale"), 2, 3, radius=0.6)
    y = eval_map(f, x)
    assert np.abs(y.coords[0] - x.coords[0]).max() == 0
    assert np.abs(y.coords[1] - 0.5j * x.coords[1]).max() == 0
    assert identity_map(2).d_in == 2
    with pytest.raises(ValueError):
        ScalingMap([1.0, 1.5])


def test_polynomial_map_eval():
    f = PolynomialMap(
        [parse_polynomial("x1^2"), parse_polynomial("x1*x2 - x2*x1")], d_in=2
    )
    x = random_ball_point(_rng("poly"), 2, 2, radius=0.5)
    a, b = x.coords
    y = eval_map(f, x)
    assert np.abs(y.coords[0] - a @ a).max() < 1e-14
    assert np.abs(y.coords[1] - (a @ b - b @ a)).max() < 1e-14


def test_eval_enforces_the_open_ball():
    f = PolynomialMap([parse_polynomial("x1^2")], d_in=1)
    with pytest.raises(DomainError):
        eval_map(f, MatrixTuple([1.2 * np.eye(2)]))
    with pytest.raises(DimensionMismatchError):
        eval_map(f, MatrixTuple.zeros(2, 2))


def test_maps_respect_direct_sums():
    x = random_ball_point(_rng("dsum", 0), 2, 2, radius=0.4)
    y = random_ball_point(_rng("dsum", 1), 2, 3, radius=0.5)
    for f in [
        PolynomialMap([parse_polynomial("x1*x2 + 0.3*x2")], d_in=2),
        mobius((0.3, -0.2j)),
        make_test_map("nonlinear"),
    ]:
        lhs = eval_map(f, direct_sum(x, y))
        rhs_x, rhs_y = eval_map(f, x), eval_map(f, y)
        for k in range(f.d_out):
            assert np.abs(lhs.coords[k][:2, :2] - rhs_x.coords[k]).max() < 1e-12
            assert np.abs(lhs.coords[k][2:, 2:] - rhs_y.coords[k]).max() < 1e-12
            assert np.abs(lhs.coords[k][:2, 2:]).max() < 1e-12
            assert np.abs(lhs.coords[k][2:, :2]).max() < 1e-12


def test_maps_respect_similarities():
    rng = _rng("simil")
    x = random_ball_point(rng, 2, 3, radius=0.3)
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
    for f in [
        PolynomialMap([parse_polynomial("x1*x2 - x2*x1 + 0.1")], d_in=2),
        mobius((0.2, 0.1)),
    ]:
        lhs = eval_map(f, conjugate(x, q))
        rhs = conjugate(eval_map(f, x), q)
        assert max(np.abs(a - b).max() for a, b in zip(lhs.coords, rhs.coords)) < 1e-12


def test_diff_diff_of_square_is_xz_plus_zy():
    f = PolynomialMap([parse_polynomial("x1^2")], d_in=1)
    rng = _rng("ddiff")
    x = random_ball_point(rng, 1, 2, radius=0.5)
    y = random_ball_point(rng, 1, 3, radius=0.5)
    z = TangentTuple([rng.standard_normal((2, 3))])
    got = diff_diff(f, x, y, z)
    expected = x.coords[0] @ z.blocks[0] + z.blocks[0] @ y.coords[0]
    assert got.shape == (2, 3)
    assert np.abs(got.blocks[0] - expected).max() < 1e-12


def test_diff_diff_linear_in_direction_even_for_mobius():
    f = mobius((0.4, -0.1))
    rng = _rng("ddiff-lin")
    x = random_ball_point(rng, 2, 2, radius=0.7)
    y = random_ball_point(rng, 2, 2, radius=0.7)
    z1 = TangentTuple([rng.standard_normal((2, 2)) for _ in range(2)])
    z2 = TangentTuple([rng.standard_normal((2, 2)) for _ in range(2)])
    combo = diff_diff(f, x, y, 0.3j * z1 - 1.7 * z2)
    split = 0.3j * diff_diff(f, x, y, z1) - 1.7 * diff_diff(f, x, y, z2)
    assert (combo - split).frob_norm() < 1e-9
    # Scaling the direction must scale the output exactly.
    double = diff_diff(f, x, y, 2.0 * z1)
    assert (double - 2.0 * diff_diff(f, x, y, z1)).frob_norm() < 1e-9


@pytest.mark.parametrize(
    "make",
    [
        lambda: ScalingMap([1.0, 0.3 - 0.4j]),
        lambda: PolynomialMap(
            [parse_polynomial("x1*x2*x1 - 0.5*x2 + 0.1"), parse_polynomial("x2^2")],
            d_in=2,
        ),
        lambda: mobius((0.3, -0.2j)),
        lambda: compose(mobius((0.2, 0.0)), make_test_map("nonlinear")),
    ],
    ids=["scaling", "polynomial", "mobius", "composed"],
)
def test_derivative_routes_agree(make):
    f = make()
    for i, n in enumerate((1, 2, 3)):
        x = random_ball_point(_rng("deriv", i), f.d_in, n, radius=0.4)
        exact = derivative_superop(f, x)
        columns = derivative_superop_columns(f, x)
        assert exact.shape == (f.d_out * n * n, f.d_in * n * n)
        assert np.abs(exact - columns).max() < 1e-9
        fd = finite_difference_derivative(f, x)
        scale = max(1.0, np.linalg.norm(exact))
        assert np.linalg.norm(exact - fd) / scale < 1e-5


def test_derivative_first_order_prediction():
    f = mobius((0.3, 0.1j))
    rng = _rng("firstorder")
    x = random_ball_point(rng, 2, 2, radius=0.3)
    d = derivative_superop(f, x)
    e = TangentTuple([rng.standard_normal((2, 2)) * 1e-5 for _ in range(2)])
    bumped = MatrixTuple([c + b for c, b in zip(x.coords, e.blocks)])
    lhs = eval_map(f, bumped).to_vector() - eval_map(f, x).to_vector()
    rhs = d @ e.to_vector()
    assert np.abs(lhs - rhs).max() < 1e-8


def test_mobius_is_an_involution_swapping_zero_and_a():
    a = (0.3, -0.25j)
    f = mobius(a)
    scalar_a = MatrixTuple.from_scalar_point(a, 3)
    assert (eval_map(f, MatrixTuple.zeros(2, 3)) - scalar_a).frob_norm() < 1e-12
    assert eval_map(f, scalar_a).frob_norm() < 1e-12
    x = random_ball_point(_rng("invol"), 2, 3, radius=0.8)
    back = eval_map(f, eval_map(f, x))
    assert (back - x).frob_norm() < 1e-9
    assert row_norm(eval_map(f, x)) < 1


def test_mobius_zero_parameter_is_identity():
    f = mobius((0.0, 0.0))
    x = random_ball_point(_rng("mob0"), 2, 2, radius=0.5)
    assert (eval_map(f, x) - x).frob_norm() == 0
    with pytest.raises(ValueError):
        mobius((0.8, 0.7))  # |a| >= 1


def test_compose_evaluates_outer_last_and_chains_derivatives():
    f = make_test_map("scaling", factors=(1, 0.5))
    g = mobius((0.2, 0.1))
    h = compose(g, f)
    x = random_ball_point(_rng("compose"), 2, 2, radius=0.5)
    direct = eval_map(g, eval_map(f, x))
    assert (eval_map(h, x) - direct).frob_norm() < 1e-12
    chain = derivative_superop(g, eval_map(f, x)) @ derivative_superop(f, x)
    assert np.abs(derivative_superop(h, x) - chain).max() < 1e-10


def test_make_test_map_validates_inputs():
    with pytest.raises(ValueError):
        make_test_map("scaling")  # factors required
    with pytest.raises(ValueError):
        make_test_map("scaling", factors=(0.5, 1.0))  # 1 after a contraction
    with pytest.raises(ValueError):
        make_test_map("scaling", factors=(1.0, 1.5))
    with pytest.raises(ValueError):
        make_test_map("nonlinear", g="2*x1")  # not contractive
    with pytest.raises(ValueError):
        make_test_map("nonlinear", g="x1*x2")  # must use x1 only
    with pytest.raises(ValueError):
        make_test_map("spiral")
    with pytest.raises(DimensionMismatchError):
        make_test_map("nonlinear", conjugate_a=(0.1,))


def test_nonlinear_test_map_fixes_the_first_axis():
    f = make_test_map("nonlinear")
    rng = _rng("nonlin")
    a = rng.standard_normal((3, 3))
    a *= 0.5 / np.linalg.norm(a, 2)
    x = MatrixTuple([a, np.zeros((3, 3))])
    assert (eval_map(f, x) - x).frob_norm() < 1e-12
    y = MatrixTuple([a, 0.3 * np.eye(3)])
    assert (eval_map(f, y) - y).frob_norm() > 1e-3


def test_parse_map_spec_round_trips():
    x = random_ball_point(_rng("spec"), 2, 2, radius=0.5)
    pairs = [
        ("scale factors=(1, 0.5)", make_test_map("scaling", factors=(1, 0.5))),
        ("mobius a=(0.2, -0.1j)", mobius((0.2, -0.1j))),
        (
            "compose(mobius a=(0.2,0); scale factors=(1,0.5))",
            compose(mobius((0.2, 0)), make_test_map("scaling", factors=(1, 0.5))),
        ),
        (
            "x1^2; x1*x2 - x2*x1",
            PolynomialMap(
                [parse_polynomial("x1^2"), parse_polynomial("x1*x2 - x2*x1")], d_in=2
            ),
        ),
        ("testmap kind=nonlinear g={0.5 + 0.5*x1}", make_test_map("nonlinear")),
    ]
    for text, reference in pairs:
        f = parse_map_spec(text)
        assert f.d_in == reference.d_in and f.d_out == reference.d_out
        got = eval_map(f, x) if f.d_in == 2 else None
        want = eval_map(reference, x) if reference.d_in == 2 else None
        if got is not None:
            assert (got - want).frob_norm() < 1e-12


def test_parse_map_spec_errors():
    for bad in ["", "mobius a=(0.2", "compose(mobius a=(0.1,0)", "scale", "warp k=2"]:
        with pytest.raises((ParseError, ValueError)):
            parse_map_spec(bad)
    with pytest.raises(ParseError) as err:
        parse_map_spec("mobius a=(0.2, oops)")
    assert err.value.position is not None


def test_entire_maps_differentiate_near_the_boundary():
    # diff_diff needs no rescaling for polynomials, so base points close to
    # the sphere are fine.
    f = PolynomialMap([parse_polynomial("x1^3")], d_in=1)
    x = MatrixTuple([0.99 * np.eye(2)])
    z = TangentTuple([np.ones((2, 2))])
    got = diff_diff(f, x, x, z)
    a = x.coords[0]
    expected = a @ a @ z.blocks[0] + a @ z.blocks[0] @ a + z.blocks[0] @ a @ a
    assert np.abs(got.blocks[0] - expected).max() < 1e-12
