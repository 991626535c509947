"""Acceptance gate: one test per criterion, at the pinned tolerances.

Each criterion is an independent end-to-end claim checked against an oracle
that shares no code with the implementation (dense eigensolvers, finite
differences, brute sampling, closed forms). The module-scoped context shares
the expensive fixtures (200 generic contractions, six verification runs)
across criteria, exactly as the CLI ``selftest`` does.
"""

import pytest

from freeball.acceptance import AcceptanceContext, all_criteria, run_one

_CRITERIA = all_criteria()


@pytest.fixture(scope="module")
def ctx():
    return AcceptanceContext(seed=0)


@pytest.mark.parametrize(
    "number,name,func",
    _CRITERIA,
    ids=[f"{number:02d}-{name.replace(' ', '-')}" for number, name, _ in _CRITERIA],
)
def test_criterion(number, name, func, ctx):
    result = run_one(number, name, func, ctx)
    print()
    print(result.line())
    assert result.passed, result.detail


def test_the_suite_has_twelve_criteria():
    assert [number for number, _, _ in _CRITERIA] == list(range(1, 13))
