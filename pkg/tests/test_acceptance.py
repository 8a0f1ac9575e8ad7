"""End-to-end acceptance checks, one test per check of the reproduction suite."""

import warnings

import pytest

from stieltjes.checks import CHECKS, Context, _name_of
from stieltjes.errors import QuadratureWarning


@pytest.fixture(scope="module")
def ctx():
    return Context(seed=0)


@pytest.mark.parametrize("check", CHECKS, ids=[_name_of(c) for c in CHECKS])
def test_acceptance(check, ctx):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", QuadratureWarning)
        result = check(ctx)
    print(result.line())
    assert result.passed, result.line()
