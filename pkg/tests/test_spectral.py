import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stieltjes import AlphaOutOfStrip, Regime, alpha_from_lambda, lambda_from_alpha


@pytest.mark.parametrize(
    "lam, alpha, regime",
    [
        (1 / math.pi, 0.5, Regime.POS_RE_LOG),
        (-1 / math.pi, -0.5, Regime.NEG_RE_LOG),
        (0.0, 0.0, Regime.ZERO),
    ],
)
def test_special_values(lam, alpha, regime):
    p = alpha_from_lambda(lam)
    assert p.regime is regime
    assert p.alpha == pytest.approx(alpha, abs=1e-15)


def test_real_positive_round_trip():
    lam = float(mpmath.sin(0.3 * mpmath.pi) / mpmath.pi)
    assert lam == pytest.approx(0.257518, abs=1e-6)
    p = alpha_from_lambda(lam)
    assert p.regime is Regime.POS_RE
    assert abs(p.alpha - 0.3) < 1e-12


def test_lambda_from_alpha_values():
    assert lambda_from_alpha(0.5) == pytest.approx(1 / math.pi, rel=1e-15)
    assert lambda_from_alpha(-0.5) == pytest.approx(-1 / math.pi, rel=1e-15)
    want = complex(mpmath.sqrt(2) / (2 * mpmath.pi))
    assert abs(lambda_from_alpha(0.25) - want) < 1e-15


def test_strip_enforced():
    with pytest.raises(AlphaOutOfStrip):
        lambda_from_alpha(0.6)


def test_pure_imaginary_regime():
    p = alpha_from_lambda(0.5j)
    assert p.regime is Regime.PURE_IMAG
    assert abs(p.alpha.real) < 1e-12
    assert abs(cmath.sin(math.pi * p.alpha) / math.pi - 0.5j) < 1e-12


def test_non_finite_lambda():
    with pytest.raises(ValueError):
        alpha_from_lambda(complex(float("nan"), 0))


def test_round_trip_random_sample():
    rng = np.random.default_rng(7)
    count = 0
    while count < 500:
        lam = complex(*rng.uniform(-2, 2, 2))
        if abs(lam) > 2 or abs(lam.real) <= 1e-6:
            continue
        count += 1
        p = alpha_from_lambda(lam)
        assert abs(p.alpha.real) <= 0.5 + 1e-12
        if not p.regime.is_log:
            assert np.sign(p.alpha.real) == np.sign(lam.real)
        assert abs(lambda_from_alpha(p.alpha) - lam) <= 1e-10 * abs(lam)


finite = st.floats(-2, 2, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(finite, finite)
def test_round_trip_property(re, im):
    lam = complex(re, im)
    if abs(lam) > 2 or abs(re) <= 1e-6:
        return
    p = alpha_from_lambda(lam)
    assert abs(lambda_from_alpha(p.alpha) - lam) <= 1e-10 * abs(lam)
    assert p.regime.positive == (re > 0)
