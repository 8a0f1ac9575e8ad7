"""Solutions of f(x) = g(x) + lam * int_0^inf f(y)/(x+y) dy.

The particular solution is g + lam R g for an explicit resolvent R; all
resolvent integrals are taken in the ratio variable u = y/x, where the
kernels have their removable point at u = 1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import NonPositiveArgument, NormDiverged, PureImagUnsolvable, QuadratureWarning, RegionBoundary
from .functions import HalfLineFunction, Table
from .kernels import (
    DEFAULT_BLEND,
    BlendFunction,
    Kernel,
    KernelSpec,
    log_log_quotient,
    log_pow_diff_quotient,
    log_ratio_kernel,
)
from .quadrature import DEFAULT_CONFIG, LOG_EXTENT, QuadConfig, integrate_family
from .spectral import Regime, SpectralParam, alpha_from_lambda

# Outer integrals over a solution stop at |ln y| = 350 so that the inner
# resolvent integrals at those nodes still see most of their own range.
SOLUTION_LOG_EXTENT = 350.0
BOUNDARY_TOL = 1e-12


def _as_param(param) -> SpectralParam:
    return param if isinstance(param, SpectralParam) else alpha_from_lambda(complex(param))


def _positive(x):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise NonPositiveArgument("evaluation points must be > 0")
    return x


def _warn(conv, what):
    bad = int(np.size(conv) - np.count_nonzero(conv))
    if bad:
        warnings.warn(f"{what}: {bad} integral(s) did not reach tolerance", QuadratureWarning, stacklevel=3)


def homogeneous_solution(param, A: complex, B: complex, x):
    """Null-space element A x^-alpha + B x^(alpha-1), or its log pair at lam = 1/pi."""
    param = _as_param(param)
    x = _positive(x)
    A, B = complex(A), complex(B)
    if param.regime is Regime.POS_RE:
        a = param.alpha
        out = A * x ** (-a) + B * x ** (a - 1) if (A or B) else np.zeros(x.shape, dtype=complex)
    elif param.regime is Regime.POS_RE_LOG:
        out = x ** -0.5 * (A + B * np.log(x))
    else:
        out = np.zeros(x.shape, dtype=complex)
    out = np.asarray(out, dtype=complex)
    return out[()] if out.ndim == 0 else out


# --------------------------------------------------------------------------
# resolvent weights in the ratio variable


def kernel_log_weight(spec: KernelSpec, alpha: complex):
    """log of x R(x, x u) as a function of (w, lx)."""
    return lambda w, lx: log_ratio_kernel(spec, w, lx, alpha)


def closed_form_log_weight(regime: Regime, alpha: complex, phi1: BlendFunction = DEFAULT_BLEND):
    """log of lam x R(x, x u) written through the explicit E-space solution formulas.

    Each branch is the closed form for one regime (negative real part,
    lam = -1/pi, positive real part, lam = 1/pi); the blended branches
    include Phi(x, x u).
    """
    alpha = complex(alpha)
    log_2pi2 = math.log(2 / math.pi**2)

    def log_blend(w, lx):
        lp1, lp2 = phi1.log_phis(lx + w)
        return np.logaddexp(lp1 + w, lp2 - w)

    if regime is Regime.NEG_RE:
        c = np.log(complex(np.tan(np.pi * alpha) / np.pi))
        return lambda w, lx: c + log_pow_diff_quotient(-alpha, alpha + 1, w) + 0 * lx
    if regime is Regime.NEG_RE_LOG:
        return lambda w, lx: log_2pi2 + log_log_quotient(w) + 0 * lx
    if regime is Regime.POS_RE:
        c = np.log(complex(-np.tan(np.pi * alpha) / np.pi))
        return lambda w, lx: c + log_blend(w, lx) + log_pow_diff_quotient(alpha, 1 - alpha, w)
    if regime is Regime.POS_RE_LOG:
        return lambda w, lx: log_2pi2 + log_blend(w, lx) + log_log_quotient(w)
    raise ValueError(f"no closed form for regime {regime.value}")


def integrate_weight(log_weight, g: HalfLineFunction, x, cfg: QuadConfig | None = None,
                     log_extent: float | None = None):
    """int_0^inf W(x, u) g(x u) du for each x, given log W; returns a BatchResult."""
    x = _positive(x)
    lx = np.log(np.atleast_1d(x)).ravel()
    if log_extent is None:
        log_extent = getattr(g, "log_extent", LOG_EXTENT)

    def log_integrand(w, lxb):
        return log_weight(w, lxb) + g.log_eval(lxb + w)

    return integrate_family(log_integrand, lx, singular_u=1.0, cfg=cfg, log_extent=log_extent)


def apply_resolvent(spec: KernelSpec, g: HalfLineFunction, alpha: complex, x, cfg: QuadConfig | None = None,
                    full_output: bool = False):
    """(R g)(x) = int_0^inf R(x, y; alpha) g(y) dy through the ratio substitution."""
    spec = KernelSpec(spec) if not isinstance(spec, KernelSpec) else spec
    spec.check_alpha(alpha)
    res = integrate_weight(kernel_log_weight(spec, alpha), g, x, cfg)
    if full_output:
        return res
    _warn(res.converged, "apply_resolvent")
    return _shape_like(res.values, x)


def _shape_like(values, x):
    out = np.asarray(values).reshape(np.shape(x))
    return out[()] if out.ndim == 0 else out


# --------------------------------------------------------------------------
# solutions


@dataclass
class Evaluation:
    x: np.ndarray
    values: np.ndarray
    particular: np.ndarray
    quad_err: np.ndarray
    converged: np.ndarray
    extrapolated: np.ndarray | None = None


class Solution(HalfLineFunction):
    """f = g + lam R g + homogeneous part, evaluated lazily.

    ``route`` selects how lam R g is integrated: "closed_form" uses the
    explicit E-space formulas, "kernel" multiplies lam into the point
    kernel.  Both give the same function; the second exists to
    cross-validate the first.
    """

    log_extent = SOLUTION_LOG_EXTENT

    def __init__(self, g: HalfLineFunction, param: SpectralParam, kernel: KernelSpec | None,
                 A: complex = 0, B: complex = 0, cfg: QuadConfig | None = None, route: str = "kernel",
                 diagnostics: dict | None = None):
        self.g = g
        self.param = param
        self.kernel = kernel
        self.A = complex(A)
        self.B = complex(B)
        self.cfg = cfg or DEFAULT_CONFIG
        self.route = route
        self.diagnostics = diagnostics if diagnostics is not None else {}
        if param.regime is Regime.ZERO or kernel is None:
            self._weight = None
        elif route == "closed_form":
            self._weight = closed_form_log_weight(param.regime, param.alpha, kernel.phi1)
        elif route == "kernel":
            log_lam = np.log(param.lam)
            base = kernel_log_weight(kernel, param.alpha)
            self._weight = lambda w, lx: log_lam + base(w, lx)
        else:
            raise ValueError(f"unknown route {route!r}")

    def evaluate(self, x) -> Evaluation:
        x = _positive(x)
        flat = np.atleast_1d(x).ravel()
        gv = np.asarray(self.g(flat), dtype=complex).reshape(flat.shape)
        if self._weight is None:
            part = gv
            err = np.zeros(flat.shape)
            conv = np.ones(flat.shape, dtype=bool)
        else:
            res = integrate_weight(self._weight, self.g, flat, self.cfg)
            part = gv + res.values
            err = res.errors
            conv = res.converged
        total = part + homogeneous_solution(self.param, self.A, self.B, flat)
        extra = self.g.extrapolated(np.log(flat)) if isinstance(self.g, Table) else None
        return Evaluation(flat, total, part, err, conv, extra)

    def __call__(self, x):
        ev = self.evaluate(x)
        _warn(ev.converged, "solution evaluation")
        return _shape_like(ev.values, x)

    def particular(self, x):
        ev = self.evaluate(x)
        _warn(ev.converged, "solution evaluation")
        return _shape_like(ev.particular, x)

    def log_eval(self, lx):
        lx = np.asarray(lx, dtype=float)
        flat = lx.ravel()
        ev = self.evaluate(np.exp(flat))
        with np.errstate(divide="ignore"):
            return np.log(ev.values).reshape(lx.shape)

    def homogeneous(self, x):
        return homogeneous_solution(self.param, self.A, self.B, x)

    def describe(self) -> str:
        k = self.kernel.which.value if self.kernel else "none"
        return f"solution(g={self.g.describe()}, lambda={self.param.lam}, kernel={k})"

    def to_json(self) -> dict:
        out = {
            "param": self.param.to_json(),
            "kernel": self.kernel.to_json() if self.kernel else None,
            "A": [self.A.real, self.A.imag],
            "B": [self.B.real, self.B.imag],
            "route": self.route,
            "g": self.g.describe(),
        }
        out.update(self.diagnostics)
        return out


def _probe_norm(g, space, cfg):
    from .analysis import SpaceSpec, _integral_norm

    spec = SpaceSpec.E() if space is None else SpaceSpec.Ek(space)
    res = _integral_norm(g, spec, cfg.with_(rel_tol=1e-4))
    if not res.converged or not np.isfinite(res.value.real):
        raise NormDiverged(f"the {spec.label} norm of g does not converge (estimate {res.value.real:.6g})")
    diag = {"g_norm": float(res.value.real), "norm_space": spec.label}
    if isinstance(g, Table):
        outside = _integral_norm(g, spec, cfg.with_(rel_tol=1e-4), mask=True).value.real
        frac = outside / res.value.real if res.value.real > 0 else 0.0
        diag["extrapolated_mass_fraction"] = float(frac)
        diag["extrapolation_warning"] = bool(frac > 0.01)
        if frac > 0.01:
            warnings.warn(f"{100 * frac:.1f}% of the norm of the table comes from extrapolation",
                          RuntimeWarning, stacklevel=3)
    return diag


def solve_E(g: HalfLineFunction, param, phi1: BlendFunction = DEFAULT_BLEND, A: complex = 0, B: complex = 0,
            cfg: QuadConfig | None = None, route: str = "closed_form", probe: bool = True) -> Solution:
    """Solve in the class E of functions integrable against 1/(1+x).

    Re lam < 0: unique solution g + lam R1 g.  Re lam > 0: g + lam R23 g
    plus the null-space terms selected by A, B.  Re lam = 0, lam != 0 has
    no solution in E and raises PureImagUnsolvable.
    """
    param = _as_param(param)
    cfg = cfg or DEFAULT_CONFIG
    if param.regime is Regime.PURE_IMAG:
        raise PureImagUnsolvable(
            f"lambda = {param.lam} is purely imaginary; for Re(lambda) = 0, lambda != 0 the equation "
            "has no solution in E (I - lambda S is not onto there)"
        )
    diag = _probe_norm(g, None, cfg) if probe else {}
    if param.regime is Regime.ZERO:
        kernel = None
    elif param.regime.negative:
        kernel = KernelSpec(Kernel.R1)
    else:
        kernel = KernelSpec(Kernel.R23, phi1)
    if kernel is not None:
        kernel.check_alpha(param.alpha)
    return Solution(g, param, kernel, A, B, cfg, route=route, diagnostics=diag)


def select_kernel(alpha: complex, k: float) -> Kernel:
    """Kernel whose growth class matches E_k, by the position of k against Re alpha."""
    a = complex(alpha).real
    if not 0 < k < 1:
        raise ValueError(f"k must lie in (0, 1), got {k}")
    if abs(k - a) <= BOUNDARY_TOL or abs(k - (1 - a)) <= BOUNDARY_TOL:
        raise RegionBoundary(f"k = {k} lies on a region boundary for Re alpha = {a}")
    if max(0.0, a) < k < min(1.0, 1 - a):
        return Kernel.R1
    if k > 1 - a:
        return Kernel.R2
    if k < a:
        return Kernel.R3
    raise RegionBoundary(f"k = {k} is not inside any kernel region for Re alpha = {a}")


def solve_Ek(g: HalfLineFunction, param, k: float, cfg: QuadConfig | None = None, probe: bool = True) -> Solution:
    """Solve in E_k (integrable against x^(k-1)) with the region-selected kernel."""
    param = _as_param(param)
    cfg = cfg or DEFAULT_CONFIG
    which = select_kernel(param.alpha, k)
    diag = _probe_norm(g, k, cfg) if probe else {}
    diag["k"] = float(k)
    kernel = None if param.regime is Regime.ZERO else KernelSpec(which)
    if kernel is not None:
        kernel.check_alpha(param.alpha)
    sol = Solution(g, param, kernel, 0, 0, cfg, route="kernel", diagnostics=diag)
    sol.region = which
    return sol


# --------------------------------------------------------------------------
# residuals


def default_grid(lo: float = 1e-3, hi: float = 1e3, n: int = 40) -> np.ndarray:
    return np.logspace(math.log10(lo), math.log10(hi), n)


@dataclass
class ResidualReport:
    grid: np.ndarray
    residual: np.ndarray
    max_rel_residual: float
    reference_scale: float
    quad_err: np.ndarray = field(default=None)
    converged: np.ndarray = field(default=None)

    def to_json(self) -> dict:
        return {
            "grid": [float(v) for v in self.grid],
            "residual": [[complex(r).real, complex(r).imag] for r in self.residual],
            "max_rel_residual": float(self.max_rel_residual),
            "reference_scale": float(self.reference_scale),
            "quad_err": [float(e) for e in self.quad_err],
            "converged": bool(np.all(self.converged)),
        }


def residual_check(f: HalfLineFunction, g: HalfLineFunction, lam: complex, grid=None,
                   cfg: QuadConfig | None = None) -> ResidualReport:
    """r(x) = f(x) - g(x) - lam (S f)(x) on ``grid``; relative to max |f| there."""
    from .analysis import apply_stieltjes

    grid = default_grid() if grid is None else _positive(grid).ravel()
    if grid.size == 0:
        raise ValueError("residual grid is empty")
    cfg = cfg or getattr(f, "cfg", None) or DEFAULT_CONFIG
    lam = complex(lam)
    if isinstance(f, Solution):
        ev = f.evaluate(grid)
        fv, ferr, fconv = ev.values, ev.quad_err, ev.converged
    else:
        fv = np.asarray(f(grid), dtype=complex)
        ferr, fconv = np.zeros(grid.shape), np.ones(grid.shape, dtype=bool)
    gv = np.asarray(g(grid), dtype=complex)
    if lam == 0:
        sf = np.zeros(grid.shape, dtype=complex)
        serr, sconv = np.zeros(grid.shape), np.ones(grid.shape, dtype=bool)
    else:
        res = apply_stieltjes(f, grid, cfg, full_output=True)
        sf, serr, sconv = res.values, res.errors, res.converged
    r = fv - gv - lam * sf
    scale = float(np.max(np.abs(fv)))
    rel = float(np.max(np.abs(r)) / scale) if scale > 0 else float(np.max(np.abs(r)))
    conv = fconv & sconv
    _warn(conv, "residual_check")
    return ResidualReport(grid, r, rel, scale, ferr + abs(lam) * serr, conv)
