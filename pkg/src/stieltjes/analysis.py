"""Norms, the Mellin transform, T^beta operators, growth fits and the S bound.

Function spaces on (0, inf):

* E       integrable against 1/(1+x)
* E_k     integrable against x^(k-1), 0 < k < 1
* B(e, n) sup_{x>1} |x^e f| + sup_{x<1} |x^n f| finite
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import BetaOutOfRange, NonPositiveArgument, NormDiverged, QuadratureWarning
from .functions import HalfLineFunction
from .kernels import Kernel, check_beta, log_s_profile
from .quadrature import DEFAULT_CONFIG, LOG_EXTENT, BatchResult, IntegralResult, QuadConfig, integrate_family

SUP_GRID = np.logspace(-8, 8, 200)


def _extent(f) -> float:
    return getattr(f, "log_extent", LOG_EXTENT)


def _positive(x):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise NonPositiveArgument("evaluation points must be > 0")
    return x


def _finish(res: BatchResult, x, full_output, what):
    if full_output:
        return res
    bad = int(res.converged.size - np.count_nonzero(res.converged))
    if bad:
        warnings.warn(f"{what}: {bad} integral(s) did not reach tolerance", QuadratureWarning, stacklevel=3)
    out = np.asarray(res.values).reshape(np.shape(x))
    return out[()] if out.ndim == 0 else out


# --------------------------------------------------------------------------
# spaces and norms


@dataclass(frozen=True)
class SpaceSpec:
    kind: str
    k: float | None = None
    eps: float | None = None
    eta: float | None = None

    def __post_init__(self):
        if self.kind == "Ek" and not (self.k is not None and 0 < self.k < 1):
            raise ValueError("E_k needs 0 < k < 1")
        if self.kind == "Beh" and not (self.eps is not None and self.eta is not None
                                       and 0 < self.eps < 1 and 0 < self.eta < 1):
            raise ValueError("B space needs 0 < eps, eta < 1")
        if self.kind not in ("E", "Ek", "Beh"):
            raise ValueError(f"unknown space {self.kind!r}")

    @classmethod
    def E(cls):
        return cls("E")

    @classmethod
    def Ek(cls, k):
        return cls("Ek", k=float(k))

    @classmethod
    def Beh(cls, eps, eta):
        return cls("Beh", eps=float(eps), eta=float(eta))

    @property
    def label(self) -> str:
        if self.kind == "E":
            return "E"
        if self.kind == "Ek":
            return f"E_{self.k:g}"
        return f"B_{self.eps:g},{self.eta:g}"

    def log_weight(self, lx):
        if self.kind == "E":
            return -np.logaddexp(0.0, lx)
        if self.kind == "Ek":
            return (self.k - 1) * lx
        raise ValueError("B spaces are sup-normed")


def _integral_norm(f: HalfLineFunction, space: SpaceSpec, cfg: QuadConfig, mask: bool = False) -> IntegralResult:
    extra = ()
    lo = hi = None
    if mask:
        lo, hi = float(f._lx[0]), float(f._lx[-1])
        extra = (lo, hi)

    def log_integrand(w, lx):
        val = space.log_weight(lx + w) + f.log_eval(lx + w).real
        if mask:
            val = np.where((lx + w > lo) & (lx + w < hi), -np.inf, val)
        return val.astype(complex)

    res = integrate_family(log_integrand, [0.0], cfg=cfg, log_extent=_extent(f), breakpoints=extra)
    out = res.item(0)
    out.value = complex(out.value.real, 0.0)
    return out


def sup_norm(f, eps: float, eta: float, grid=SUP_GRID):
    """(sup_{x>1} x^eps |f|, sup_{x<1} x^eta |f|) over a log grid."""
    grid = np.asarray(grid, dtype=float)
    vals = np.abs(np.asarray(f(grid), dtype=complex))
    hi = grid > 1
    with np.errstate(over="ignore"):
        a = float(np.max(grid[hi] ** eps * vals[hi])) if hi.any() else 0.0
        b = float(np.max(grid[~hi] ** eta * vals[~hi])) if (~hi).any() else 0.0
    return a, b


def norm(f: HalfLineFunction, space: SpaceSpec, cfg: QuadConfig | None = None, full_output: bool = False):
    """Norm of ``f`` in E, E_k or B(eps, eta); inf when the integral diverges.

    B norms are grid sups over 200 log-spaced points in [1e-8, 1e8].
    """
    cfg = cfg or DEFAULT_CONFIG
    if space.kind == "Beh":
        a, b = sup_norm(f, space.eps, space.eta)
        value = a + b
        if full_output:
            return {"value": value, "sup_above_1": a, "sup_below_1": b, "converged": bool(np.isfinite(value))}
        return value
    res = _integral_norm(f, space, cfg)
    value = res.value.real if np.isfinite(res.abs_error_estimate) else math.inf
    if full_output:
        return {"value": value, "abs_error_estimate": res.abs_error_estimate, "converged": res.converged,
                "subdivisions_used": res.subdivisions_used}
    if not res.converged and np.isfinite(value):
        warnings.warn("norm did not reach tolerance", QuadratureWarning, stacklevel=2)
    return value


def require_norm(f, space: SpaceSpec, cfg: QuadConfig | None = None) -> float:
    v = norm(f, space, (cfg or DEFAULT_CONFIG).with_(rel_tol=1e-4))
    if not np.isfinite(v):
        raise NormDiverged(f"the {space.label} norm diverges")
    return v


# --------------------------------------------------------------------------
# Stieltjes operator, Mellin transform and convolution


def apply_stieltjes(f: HalfLineFunction, x, cfg: QuadConfig | None = None, full_output: bool = False):
    """(S f)(x) = int_0^inf f(y)/(x+y) dy."""
    x = _positive(x)
    lx = np.log(np.atleast_1d(x)).ravel()

    def log_integrand(w, lxb):
        return f.log_eval(lxb + w) - np.logaddexp(0.0, w)

    res = integrate_family(log_integrand, lx, cfg=cfg, log_extent=_extent(f))
    return _finish(res, x, full_output, "apply_stieltjes")


def mellin(f: HalfLineFunction, s: complex, cfg: QuadConfig | None = None, full_output: bool = False):
    """(M f)(s) = int_0^inf x^(s-1) f(x) dx for 0 < Re s < 1."""
    s = complex(s)
    if not 0 < s.real < 1:
        raise ValueError(f"need 0 < Re s < 1, got s = {s}")

    def log_integrand(w, lx):
        return (s - 1) * (lx + w) + f.log_eval(lx + w)

    res = integrate_family(log_integrand, [0.0], cfg=cfg, log_extent=_extent(f))
    if full_output:
        return res.item(0)
    return _finish(res, 1.0, False, "mellin")


def mellin_convolve(f: HalfLineFunction, g: HalfLineFunction, x, cfg: QuadConfig | None = None,
                    full_output: bool = False):
    """(f * g)(x) = int_0^inf f(y) g(x/y) dy / y."""
    x = _positive(x)
    lx = np.log(np.atleast_1d(x)).ravel()
    extent = min(_extent(f), _extent(g))

    def log_integrand(w, lxb):
        # y = x u, so x/y = 1/u and dy/y = du/u
        return f.log_eval(lxb + w) + g.log_eval(-w + 0 * lxb) - w

    res = integrate_family(log_integrand, lx, cfg=cfg, log_extent=extent)
    return _finish(res, x, full_output, "mellin_convolve")


class Convolution(HalfLineFunction):
    """Lazily evaluated f * g, usable wherever a function is expected."""

    log_extent = 350.0

    def __init__(self, f, g, cfg: QuadConfig | None = None):
        self.f, self.g, self.cfg = f, g, cfg

    def log_eval(self, lx):
        lx = np.asarray(lx, dtype=float)
        res = mellin_convolve(self.f, self.g, np.exp(lx.ravel()), self.cfg, full_output=True)
        with np.errstate(divide="ignore"):
            return np.log(res.values).reshape(lx.shape)

    def describe(self) -> str:
        return f"({self.f.describe()}) conv ({self.g.describe()})"


# --------------------------------------------------------------------------
# T^beta


def t_beta_apply(f: HalfLineFunction, beta: complex, x, cfg: QuadConfig | None = None, full_output: bool = False):
    """(T^beta f)(x) = int_0^inf s(u; beta) f(x u) du, s(u) = (u^beta - 1)/(u^2 - 1)."""
    beta = complex(beta)
    check_beta(beta)
    x = _positive(x)
    if beta == 0:
        n = np.size(x)
        res = BatchResult(np.zeros(n, dtype=complex), np.zeros(n), np.ones(n, dtype=bool), 0)
        return _finish(res, x, full_output, "t_beta_apply")
    lx = np.log(np.atleast_1d(x)).ravel()

    def log_integrand(w, lxb):
        return log_s_profile(w, beta) + f.log_eval(lxb + w)

    res = integrate_family(log_integrand, lx, singular_u=1.0, cfg=cfg, log_extent=_extent(f))
    return _finish(res, x, full_output, "t_beta_apply")


# (beta_plus, beta_minus) with R^alpha = (T^beta_plus - T^beta_minus) / cos(pi alpha)
def _decomposition(which: Kernel, alpha: complex):
    a = complex(alpha)
    if which is Kernel.R1:
        return a + 1, -a
    if which is Kernel.R2:
        return a + 1, 2 - a
    if which is Kernel.R3:
        return a - 1, -a
    raise ValueError(f"no T^beta decomposition for {which}")


def resolvent_via_t_beta(which, f: HalfLineFunction, alpha: complex, x, cfg: QuadConfig | None = None):
    """(R_i f)(x) assembled from two T^beta operators."""
    which = Kernel(which)
    bp, bm = _decomposition(which, alpha)
    try:
        check_beta(bp)
        check_beta(bm)
    except BetaOutOfRange as exc:
        raise BetaOutOfRange(f"alpha = {alpha} is outside the decomposition range of {which.value}: {exc}") from None
    c = np.cos(np.pi * complex(alpha))
    return (t_beta_apply(f, bp, x, cfg) - t_beta_apply(f, bm, x, cfg)) / c


# --------------------------------------------------------------------------
# growth exponents


@dataclass
class GrowthFit:
    eps_hat: float
    eta_hat: float
    r_squared: tuple
    windows: tuple
    degenerate: tuple = (False, False)
    n_points: int = 0

    def to_json(self) -> dict:
        def num(v):
            return None if v is None or not np.isfinite(v) else float(v)

        return {
            "eps_hat": num(self.eps_hat),
            "eta_hat": num(self.eta_hat),
            "r_squared": [num(v) for v in self.r_squared],
            "windows": [list(w) for w in self.windows],
            "degenerate": list(self.degenerate),
            "n_points": self.n_points,
        }


def _slope(f, window, n, abs_tol):
    lo, hi = window
    if not 0 < lo < hi:
        raise ValueError(f"bad fit window {window}")
    x = np.logspace(math.log10(lo), math.log10(hi), n)
    v = np.abs(np.asarray(f(x), dtype=complex))
    keep = v > abs_tol
    if keep.sum() < 8:
        return math.nan, math.nan, True
    fit = stats.linregress(np.log(x[keep]), np.log(v[keep]))
    return float(fit.slope), float(fit.rvalue**2), False


def fit_growth(f, window_inf=(1e2, 1e6), window_zero=(1e-6, 1e-2), n: int = 24, abs_tol: float = 1e-13) -> GrowthFit:
    """Least-squares power-law exponents of |f| near infinity and near zero.

    eps_hat is minus the slope of ln|f| against ln x on ``window_inf``;
    eta_hat is minus the slope on ``window_zero``.  A window on which
    |f| never exceeds ``abs_tol`` is flagged degenerate and its exponent
    is NaN.
    """
    if n < 8:
        raise ValueError("fits use at least 8 points per window")
    s_inf, r_inf, d_inf = _slope(f, window_inf, n, abs_tol)
    s_zero, r_zero, d_zero = _slope(f, window_zero, n, abs_tol)
    return GrowthFit(-s_inf, -s_zero, (r_inf, r_zero), (tuple(window_inf), tuple(window_zero)),
                     (d_inf, d_zero), n)


def select_growth_exponents(alpha: complex, eps: float, eta: float) -> tuple[float, float]:
    """Exponents (eps~, eta~) of the class that R23 maps B(eps, eta) into.

    eps passes through when 0 < eps < Re alpha, otherwise the midpoint of
    (0, Re alpha) is used; eta passes through when 1 - Re alpha < eta < 1,
    otherwise the midpoint of (1 - Re alpha, 1).
    """
    a = complex(alpha).real
    if not 0 < a <= 0.5:
        raise ValueError("the blended kernel needs 0 < Re alpha <= 1/2")
    e = eps if 0 < eps < a else a / 2
    h = eta if 1 - a < eta < 1 else (1 + (1 - a)) / 2
    return e, h


# --------------------------------------------------------------------------
# bound for S on B(eps, eta)


def s_bound_constants(eps: float, eta: float) -> tuple[float, float]:
    """Constants bounding x^eps |S f| on x > 1 and x^eta |S f| on x < 1."""
    if not (0 < eps < 1 and 0 < eta < 1):
        raise ValueError("need 0 < eps, eta < 1")
    c1 = math.pi / math.sin(math.pi * eps) + 1 / (1 - eta)
    c2 = 1 / eps + math.pi / math.sin(math.pi * eta)
    return c1, c2


@dataclass
class BoundReport:
    lhs: float
    rhs: float
    holds: bool
    f_norm: float = 0.0
    constants: tuple = ()
    parts: dict = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs > 0 else 0.0

    def to_json(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "holds": self.holds, "ratio": self.ratio,
                "f_norm": self.f_norm, "constants": list(self.constants), **self.parts}


def check_s_bound(f: HalfLineFunction, eps: float, eta: float, cfg: QuadConfig | None = None,
                      slack: float = 1e-6) -> BoundReport:
    """Compare the B(eps, eta) norm of S f with max(C1, C2) times that of f."""
    c1, c2 = s_bound_constants(eps, eta)
    fa, fb = sup_norm(f, eps, eta)
    fn = fa + fb
    sf = apply_stieltjes(f, SUP_GRID, cfg)

    def sfun(x):
        return sf

    sa, sb = sup_norm(sfun, eps, eta)
    lhs = sa + sb
    rhs = max(c1, c2) * fn
    parts = {
        "sf_sup_above_1": sa,
        "sf_sup_below_1": sb,
        "part_bound_above_1": c1 * fn,
        "part_bound_below_1": c2 * fn,
        "holds_partwise": bool(sa <= c1 * fn * (1 + slack) and sb <= c2 * fn * (1 + slack)),
    }
    return BoundReport(lhs, rhs, bool(lhs <= rhs * (1 + slack)), fn, (c1, c2), parts)
