import numpy as np
import pytest

from freeball.errors import DimensionMismatchError
from freeball.points import row_norm
from freeball.polynomials import parse_polynomial
from freeball.structure import is_generic, mat_span
from freeball.varieties import (
    VarietySpec,
    builtin_fixture,
    builtin_variety,
    on_variety,
    sample_level_n,
    scalar_points,
    variety_hypothesis_report,
)


@pytest.mark.parametrize(
    "name", ["commutator-half", "fermionic-half", "q-commutation(2)"]
)
def test_builtin_fixtures_lie_on_their_varieties(name):
    v = builtin_variety(name)
    x = builtin_fixture(name)
    assert x is not None
    assert row_norm(x) < 1
    flag, residual = on_variety(v, x)
    assert flag
    assert residual < 1e-12


def test_builtin_variety_rejects_unknown_names():
    with pytest.raises(ValueError):
        builtin_variety("heisenberg")
    with pytest.raises(ValueError):
        builtin_variety("q-commutation(oops)")


def test_variety_spec_validation():
    with pytest.raises(ValueError):
        VarietySpec(2, ())
    with pytest.raises(DimensionMismatchError):
        VarietySpec(1, (parse_polynomial("x2"),))


def test_fermionic_fixture_is_generic():
    x = builtin_fixture("fermionic-half")
    flag, dim = is_generic(x)
    assert flag and dim == 4


def test_scalar_points_of_commutator_half_form_a_line():
    # Scalars commute, so the relation collapses to -x2/2: the scalar points
    # are the whole first-axis disc, a positive-dimensional family.
    v = builtin_variety("commutator-half")
    search = scalar_points(v)
    assert search.positive_dimensional
    assert len(search.points) > 5
    for p in search.points:
        assert abs(p[1]) < 1e-8
        assert np.linalg.norm(p) < 1


def test_scalar_points_of_fermionic_half_are_empty():
    # x1^2 = x2^2 = 0 forces both scalars to zero, where x1 x2 + x2 x1 = 1/2
    # fails; the variety has no level-1 points at all.
    v = builtin_variety("fermionic-half")
    search = scalar_points(v)
    assert search.points == ()
    assert not search.positive_dimensional


def test_sample_level_n_returns_on_variety_ball_points():
    v = builtin_variety("commutator-half")
    points = sample_level_n(v, 2, 4, seed=3)
    assert len(points) == 4
    # the shipped fixture leads the list
    fixture = builtin_fixture("commutator-half")
    assert (points[0] - fixture).frob_norm() == 0
    for x in points:
        assert row_norm(x) < 1
        flag, residual = on_variety(v, x)
        assert flag, residual


def test_sampler_warns_when_the_variety_has_no_points_at_a_level():
    v = builtin_variety("fermionic-half")
    with pytest.warns(RuntimeWarning):
        points = sample_level_n(v, 1, 3, seed=0)
    assert points == []


def test_hypothesis_report_commutator_half():
    v = builtin_variety("commutator-half")
    report = variety_hypothesis_report(v, max_level=2, seed=0, samples_per_level=6)
    assert report.hypothesis_ok
    assert report.scalar_points_found
    assert report.matspan_per_level[-1].full
    by_level = {s.level: s for s in report.matspan_per_level}
    assert by_level[1].dim == 1  # the scalar line spans only the first axis


def test_hypothesis_report_fermionic_half_fails_scalar_hypothesis():
    v = builtin_variety("fermionic-half")
    with pytest.warns(RuntimeWarning):  # level-1 sampler comes up empty
        report = variety_hypothesis_report(v, max_level=2, seed=0, samples_per_level=4)
    assert not report.hypothesis_ok
    assert report.scalar.points == ()
    # yet the level-2 points span everything
    assert any(s.full for s in report.matspan_per_level)


def test_hypothesis_report_rejects_large_levels():
    v = builtin_variety("commutator-half")
    with pytest.raises(ValueError):
        variety_hypothesis_report(v, max_level=9)


def test_q_commutation_scalars_are_the_two_axes():
    v = builtin_variety("q-commutation(2)")
    search = scalar_points(v)
    assert search.positive_dimensional
    assert search.points
    for p in search.points:
        # on either axis the single relation reduces to -x1*x2; the search
        # only promises a small residual, so bound the product, not a factor
        assert abs(p[0] * p[1]) < 1e-9


def test_custom_variety_samples():
    # the free sphere relation x1^2 + x2^2 = 1/4 at level 2
    v = VarietySpec(2, (parse_polynomial("x1^2 + x2^2 - 0.25"),))
    points = sample_level_n(v, 2, 3, seed=1)
    assert points
    for x in points:
        value = x.coords[0] @ x.coords[0] + x.coords[1] @ x.coords[1]
        assert np.abs(value - 0.25 * np.eye(2)).max() < 1e-9
