import math
import warnings

import mpmath
import numpy as np
import pytest

from stieltjes import (
    BlendFunction,
    Kernel,
    KernelSpec,
    NormDiverged,
    PureImagUnsolvable,
    RegionBoundary,
    alpha_from_lambda,
    apply_resolvent,
    homogeneous_solution,
    integrate_halfline,
    lambda_from_alpha,
    parse_gspec,
    residual_check,
    resolvent_point,
    solve_E,
    solve_Ek,
)
from stieltjes.errors import QuadratureWarning
from stieltjes.solver import select_kernel

mpmath.mp.dps = 30


@pytest.fixture(autouse=True)
def _quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", QuadratureWarning)
        yield


def lam_of(alpha):
    return lambda_from_alpha(alpha)


def mp_r1(t, a):
    t, a = mpmath.mpf(t), mpmath.mpf(a)
    return float((t ** (-a) - t ** (a + 1)) / (mpmath.cos(mpmath.pi * a) * (1 - t * t)))


def test_homogeneous_examples():
    assert np.all(homogeneous_solution(alpha_from_lambda(-0.2), 3, 4, np.array([0.5, 2.0])) == 0)
    assert homogeneous_solution(alpha_from_lambda(1 / math.pi), 1, 0, 4.0) == pytest.approx(0.5)
    assert homogeneous_solution(alpha_from_lambda(lam_of(0.3)), 0, 0, 2.0) == 0
    x = 0.7
    v = homogeneous_solution(alpha_from_lambda(lam_of(0.3)), 2, -1, x)
    assert v == pytest.approx(2 * x**-0.3 - x**-0.7, rel=1e-12)
    v = homogeneous_solution(alpha_from_lambda(1 / math.pi), 1, 2, x)
    assert v == pytest.approx(x**-0.5 * (1 + 2 * math.log(x)), rel=1e-14)


def test_negative_branch_reproduces_r1():
    sol = solve_E(parse_gspec("h"), lam_of(-0.3))
    x = np.array([0.5, 1.0, 2.0])
    got = sol(x)
    want = np.array([mp_r1(v, -0.3) if v != 1 else 0.4 / (2 * math.cos(0.3 * math.pi)) for v in x])
    assert np.allclose(got, want, rtol=1e-6, atol=0)
    assert sol.kernel.which is Kernel.R1


def test_zero_forcing_gives_homogeneous_part():
    sol = solve_E(parse_gspec("zero"), lam_of(0.3), A=2, B=-1, probe=False)
    x = np.array([0.1, 1.0, 8.0])
    assert np.allclose(sol(x), 2 * x**-0.3 - x**-0.7, rtol=1e-12)


def test_zero_lambda_returns_g():
    g = parse_gspec("expneg")
    sol = solve_E(g, 0)
    assert sol(2.0) == pytest.approx(math.exp(-2), rel=1e-15)
    assert residual_check(g, g, 0, grid=[0.5, 1, 2]).max_rel_residual == 0


def test_shift_by_homogeneous_terms_is_exact():
    g = parse_gspec("expneg")
    lam = lam_of(0.3)
    x = np.array([0.2, 1.5, 9.0])
    base = solve_E(g, lam)(x)
    shifted = solve_E(g, lam, A=1.5, B=-0.5j)(x)
    hom = homogeneous_solution(alpha_from_lambda(lam), 1.5, -0.5j, x)
    assert np.allclose(shifted - base, hom, rtol=1e-12, atol=0)


def test_blend_choice_changes_only_null_space_terms():
    g = parse_gspec("expneg")
    a = 0.3
    lam = lam_of(a)
    x = np.logspace(-2, 2, 17)
    d = solve_E(g, lam, phi1=BlendFunction(1.0))(x) - solve_E(g, lam, phi1=BlendFunction(2.0))(x)
    basis = np.stack([x**-a, x ** (a - 1)], axis=1)
    coef, *_ = np.linalg.lstsq(basis, d, rcond=None)
    resid = np.max(np.abs(basis @ coef - d)) / np.max(np.abs(d))
    assert np.max(np.abs(d)) > 1e-3
    assert resid <= 1e-4


@pytest.mark.parametrize("gs, lam", [
    ("h", -0.2), ("expneg", complex(-0.15, 0.1)), ("invlog2sq", -1 / math.pi),
    ("expneg", 0.25), ("h", 1 / math.pi), ("pow:0.2 * h2", complex(0.2, -0.1)),
])
def test_closed_form_route_matches_kernel_route(gs, lam):
    g = parse_gspec(gs)
    x = np.array([0.03, 1.0, 40.0])
    a = solve_E(g, lam, route="closed_form")(x)
    b = solve_E(g, lam, route="kernel")(x)
    assert np.allclose(a, b, rtol=1e-8, atol=0)


def test_blended_resolvent_identity_off_diagonal():
    # R(x, z) = 1/(x+z) + lam int (x+y)^-1 R(y, z) dy at (x, z) = (1, 2)
    a = 0.25
    lam = lam_of(a)
    spec = KernelSpec(Kernel.R23)
    x, z = 1.0, 2.0
    res = integrate_halfline(lambda y: resolvent_point(spec, y, z, a) / (x + y), singular_u=z)
    lhs = resolvent_point(spec, x, z, a)
    rhs = 1 / (x + z) + lam * res.value
    assert abs(lhs - rhs) <= 1e-8 * abs(lhs)


def test_apply_r1_to_h_at_one():
    a = -0.3
    lam = lam_of(a)
    got = apply_resolvent(KernelSpec(Kernel.R1), parse_gspec("h"), a, 1.0)
    want = (0.4 / (2 * math.cos(0.3 * math.pi)) - 0.5) / lam
    assert complex(got) == pytest.approx(want, rel=1e-8)
    assert apply_resolvent(KernelSpec(Kernel.R1), parse_gspec("zero"), a, 1.0) == 0


def test_kernel_selection_examples():
    assert select_kernel(-0.3, 0.5) is Kernel.R1
    assert select_kernel(0.4, 0.2) is Kernel.R3
    assert select_kernel(0.4, 0.8) is Kernel.R2
    with pytest.raises(RegionBoundary):
        select_kernel(0.3, 0.3)
    with pytest.raises(RegionBoundary):
        select_kernel(0.3, 0.7)


def test_region_solution_residual():
    g = parse_gspec("pow:0.1 * expneg")
    lam = lam_of(0.4)
    sol = solve_Ek(g, lam, 0.8)
    assert sol.region is Kernel.R2
    rep = residual_check(sol, g, lam, grid=np.logspace(-2, 2, 9))
    assert rep.max_rel_residual <= 1e-6


def test_residuals_of_known_functions():
    a = 0.3
    rep = residual_check(parse_gspec("pow:-0.3"), parse_gspec("zero"), lam_of(a), grid=np.logspace(-2, 2, 9))
    assert rep.max_rel_residual <= 1e-7
    rep = residual_check(parse_gspec("r1:-0.3"), parse_gspec("h"), lam_of(-0.3), grid=np.logspace(-2, 2, 9))
    assert rep.max_rel_residual <= 1e-7
    # a wrong candidate is detected
    rep = residual_check(parse_gspec("pow:-0.4"), parse_gspec("zero"), lam_of(a), grid=[1.0, 2.0])
    assert rep.max_rel_residual > 1e-2


def test_residual_report_json():
    rep = residual_check(parse_gspec("pow:-0.5"), parse_gspec("zero"), 1 / math.pi, grid=[1.0, 4.0])
    out = rep.to_json()
    assert set(out) >= {"grid", "residual", "max_rel_residual", "converged"}
    assert out["max_rel_residual"] < 1e-8


def test_divergent_forcing_rejected():
    with pytest.raises(NormDiverged):
        solve_E(parse_gspec("one"), -0.2)


def test_pure_imaginary_rejected():
    with pytest.raises(PureImagUnsolvable) as info:
        solve_E(parse_gspec("h"), 0.5j)
    assert info.value.exit_code == 3
