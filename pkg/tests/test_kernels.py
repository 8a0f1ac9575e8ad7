import math

import mpmath
import numpy as np
import pytest

from stieltjes import (
    AlphaOutOfRange,
    BetaOutOfRange,
    BlendFunction,
    Kernel,
    KernelSpec,
    NonPositiveArgument,
    capital_phi,
    r_profile,
    resolvent_point,
    t_beta_profile,
)

mpmath.mp.dps = 40


def mp_r1(t, alpha):
    t, a = mpmath.mpf(t), mpmath.mpc(alpha)
    return complex((t ** (-a) - t ** (a + 1)) / (mpmath.cos(mpmath.pi * a) * (1 - t * t)))


def mp_profile(which, t, alpha):
    if which == "r1":
        return mp_r1(t, alpha)
    base = -mp_r1(t, -complex(alpha)) / t
    return base if which == "r2" else base * t * t


def rel(a, b):
    return abs(complex(a) - complex(b)) / abs(complex(b))


@pytest.mark.parametrize("which, alpha", [
    ("r1", -0.3), ("r1", 0.2), ("r1", -0.1 + 0.2j), ("r1", 0.45),
    ("r2", 0.3), ("r2", 0.1 - 0.3j), ("r3", 0.4), ("r3", 0.05),
])
@pytest.mark.parametrize("t", [1e-6, 0.01, 0.5, 0.999, 1.7, 40.0, 1e7])
def test_profiles_match_high_precision(which, alpha, t):
    assert rel(r_profile(which, t, alpha), mp_profile(which, t, alpha)) < 1e-12


def test_r1_at_one():
    assert r_profile("r1", 1.0, -0.3) == pytest.approx(0.4 / (2 * math.cos(0.3 * math.pi)), rel=1e-14)
    assert r_profile("r1", 1.0, -0.5) == pytest.approx(1 / math.pi, rel=1e-14)


def test_r1_log_form_at_minus_half():
    # L'Hopital in alpha: -2 t^(1/2) ln t / (pi (1 - t^2))
    for t in (0.2, 3.0, 1 + 1e-9):
        tt = mpmath.mpf(t)
        want = float(-2 * mpmath.sqrt(tt) * mpmath.log(tt) / (mpmath.pi * (1 - tt * tt)))
        assert r_profile("r1", t, -0.5).real == pytest.approx(want, rel=1e-13)


def test_r3_is_t_squared_r2():
    assert r_profile("r3", 2.0, 0.3) == pytest.approx(4 * r_profile("r2", 2.0, 0.3), rel=1e-14)


def test_diagonal_continuity():
    rng = np.random.default_rng(3)
    for which in ("r1", "r2", "r3"):
        for _ in range(20):
            a = rng.uniform(-0.5, 0.49) if which == "r1" else rng.uniform(0.01, 0.5)
            c = r_profile(which, 1.0, a)
            gaps = [max(abs(r_profile(which, 1 + s * e, a) - c) for s in (1, -1)) for e in (1e-2, 1e-4, 1e-6)]
            assert gaps[0] > gaps[1] > gaps[2]
            # first-order convergence: each drop by 100 in eps drops the gap by at least ~100
            assert gaps[1] <= 2e-2 * gaps[0] + 1e-15
            assert gaps[2] <= 2e-2 * gaps[1] + 1e-15


@pytest.mark.parametrize("d", [1e-4, 1e-7])
@pytest.mark.parametrize("t", [0.5, 2.0])
def test_cos_and_log_branches_agree_near_minus_half(d, t):
    a = -0.5 + d
    cos_v = r_profile("r1", t, a, branch="cos")
    log_v = r_profile("r1", t, a, branch="log")
    assert rel(cos_v, log_v) < 1e-5
    assert rel(r_profile("r1", t, a), mp_r1(t, a)) < 1e-12


def test_profile_range_checks():
    with pytest.raises(AlphaOutOfRange):
        r_profile("r1", 1.0, 0.5)
    with pytest.raises(AlphaOutOfRange):
        r_profile("r2", 1.0, -0.1)
    with pytest.raises(NonPositiveArgument):
        r_profile("r1", 0.0, 0.1)


def test_r1_symmetry_and_mirror_relation():
    a = -0.3
    r1 = KernelSpec(Kernel.R1)
    assert resolvent_point(r1, 2.0, 5.0, a) == pytest.approx(resolvent_point(r1, 5.0, 2.0, a), rel=1e-13)
    x, y, a = 3.0, 7.0, 0.4
    lhs = resolvent_point(KernelSpec(Kernel.R2), x, y, a)
    rhs = -(y / x) * resolvent_point(r1, x, y, -a)
    assert lhs == pytest.approx(rhs, rel=1e-13)
    # R2(x, y) = R3(y, x)
    assert lhs == pytest.approx(resolvent_point(KernelSpec(Kernel.R3), y, x, a), rel=1e-13)


def test_resolvent_point_against_profile():
    x, y, a = 0.3, 2.5, 0.2 + 0.1j
    want = mp_profile("r2", x / y, a) / y
    assert rel(resolvent_point(KernelSpec(Kernel.R2), x, y, a), want) < 1e-12


def test_blended_kernel_on_diagonal():
    a = 0.25
    r23 = resolvent_point(KernelSpec(Kernel.R23), 1.0, 1.0, a)
    r2 = resolvent_point(KernelSpec(Kernel.R2), 1.0, 1.0, a)
    r3 = resolvent_point(KernelSpec(Kernel.R3), 1.0, 1.0, a)
    assert r2 == pytest.approx(r3, rel=1e-14)
    assert r23 == pytest.approx(r2, rel=1e-14)


def test_blended_kernel_off_diagonal():
    a, x, y = 0.3, 0.7, 3.0
    phi = BlendFunction(2.0)
    p1 = 1 / (1 + y * y)
    want = p1 * mp_profile("r2", x / y, a) / y + (1 - p1) * mp_profile("r3", x / y, a) / y
    assert rel(resolvent_point(KernelSpec(Kernel.R23, phi), x, y, a), want) < 1e-12


def test_capital_phi():
    # phi1(4) (4/2) + phi2(4) (2/4) with phi1 = 1/(1+y)
    assert capital_phi(2.0, 4.0) == pytest.approx(0.2 * 2 + 0.8 * 0.5, rel=1e-14)
    for x in (1e-3, 1.0, 50.0):
        assert capital_phi(x, x) == pytest.approx(1.0, rel=1e-14)
    vals = capital_phi(1.0, np.logspace(-6, 6, 121))
    assert np.all(np.isfinite(vals)) and vals.max() < 3


@pytest.mark.parametrize("m", [1, 2, 5])
def test_blend_conditions(m):
    phi = BlendFunction(m)
    assert 1e6 * phi(1e6) <= 1
    assert (1 - phi(1e-6)) / 1e-6 <= 1
    assert phi.check_conditions()["bounded"]


def test_blend_rejects_small_exponent():
    with pytest.raises(ValueError):
        BlendFunction(0.5)


def test_t_beta_profile():
    assert t_beta_profile(1.0, 0.7) == pytest.approx(0.35, rel=1e-14)
    assert t_beta_profile(2.0, 1.0) == pytest.approx(1 / 3, rel=1e-14)
    assert np.all(t_beta_profile(np.array([0.1, 1.0, 9.0]), 0) == 0)
    u, b = 0.37, 1.3 - 0.4j
    want = complex((mpmath.mpf(u) ** mpmath.mpc(b) - 1) / (mpmath.mpf(u) ** 2 - 1))
    assert rel(t_beta_profile(u, b), want) < 1e-13
    with pytest.raises(BetaOutOfRange):
        t_beta_profile(1.0, 2.5)
