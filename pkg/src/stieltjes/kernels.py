"""Profile functions r1, r2, r3, the point kernels R1, R2, R3, R23 and s(u).

All evaluators work on the logarithm of the ratio argument and return
complex logarithms internally, so that neither the removable point t = 1
nor the degenerate parameters alpha = -1/2 (for r1) and alpha = +1/2
(for r2, r3) need a separate code path, and extreme ratios never
overflow.  The basic building block is

    q(z) = expm1(z) / z,     q(0) = 1,

with which

    r1(t; a) = t^(-1/2) sinh(c L) / (sin(pi c) sinh L),   c = a + 1/2, L = ln t
             = t^(-1/2) e^((c-1)|L|) q(-2c|L|) / (pi sinc(c) q(-2|L|)).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import AlphaOutOfRange, BetaOutOfRange, NonPositiveArgument

EDGE_TOL = 1e-12
LOG_PI = math.log(math.pi)


def log_q(z):
    """log(expm1(z)/z) without overflow; exact 0 at z = 0."""
    z = np.asarray(z, dtype=complex)
    pos = z.real > 0
    zz = np.where(pos, -z, z)
    zero = zz == 0
    safe = np.where(zero, -1.0, zz)
    q = np.where(zero, 1.0, np.expm1(safe) / safe)
    with np.errstate(divide="ignore"):
        return np.log(q) + np.where(pos, z, 0)


# --------------------------------------------------------------------------
# profiles


def _check_alpha(which: str, alpha: complex) -> None:
    re = complex(alpha).real
    if which == "r1":
        ok = -0.5 - EDGE_TOL <= re < 0.5
    elif which in ("r2", "r3"):
        ok = 0 < re <= 0.5 + EDGE_TOL
    else:
        raise ValueError(f"unknown profile {which!r}")
    if not ok:
        raise AlphaOutOfRange(f"alpha = {alpha} outside the validity range of {which}")


def log_r1(L, alpha: complex):
    """Complex log of r1(e^L; alpha)."""
    L = np.asarray(L, dtype=float)
    c = complex(alpha) + 0.5
    a = np.abs(L)
    return (
        -0.5 * L
        + (c - 1) * a
        + log_q(-2 * c * a)
        - log_q(-2.0 * a)
        - (LOG_PI + np.log(np.sinc(c)))
    )


def log_profile(which: str, L, alpha: complex):
    """Complex log of r_which(e^L; alpha); no range checks."""
    if which == "r1":
        return log_r1(L, alpha)
    base = log_r1(L, -complex(alpha)) + 1j * math.pi
    if which == "r2":
        return base - L
    if which == "r3":
        return base + L
    raise ValueError(f"unknown profile {which!r}")


def _r1_cos_branch(t, alpha):
    t = np.asarray(t, dtype=float)
    alpha = complex(alpha)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = (t ** (-alpha) - t ** (alpha + 1)) / (np.cos(np.pi * alpha) * (1 - t * t))
    lim = (2 * alpha + 1) / (2 * np.cos(np.pi * alpha))
    return np.where(t == 1, lim, val)


def _r1_log_branch(t, alpha):
    # Log form at alpha = -1/2; the first-order term in delta = alpha + 1/2
    # vanishes identically, so the correction starts at delta^2.
    t = np.asarray(t, dtype=float)
    d = complex(alpha) + 0.5
    L = np.log(t)
    with np.errstate(divide="ignore", invalid="ignore"):
        base = (-2 / np.pi) * np.sqrt(t) * L / (1 - t * t)
    base = np.where(t == 1, 1 / np.pi, base)
    return base * (1 + d * d * (L * L + np.pi**2) / 6)


def r_profile(which: str, t, alpha: complex, branch: str = "auto"):
    """Evaluate r1, r2 or r3 at ``t > 0``.

    ``branch`` selects the evaluator for r1's parent expression: "auto"
    uses the uniformly stable form, "cos" the plain quotient with
    cos(pi alpha), "log" the alpha = -1/2 logarithmic form (plus its
    second-order correction).  The explicit branches exist for
    cross-checking.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(~(t_arr > 0)):
        raise NonPositiveArgument("profile argument must be > 0")
    _check_alpha(which, alpha)
    if branch == "auto":
        out = np.exp(log_profile(which, np.log(t_arr), alpha))
    else:
        fn = {"cos": _r1_cos_branch, "log": _r1_log_branch}[branch]
        if which == "r1":
            out = fn(t_arr, alpha)
        else:
            base = -fn(t_arr, -complex(alpha))
            out = base / t_arr if which == "r2" else base * t_arr
    return out[()] if out.ndim == 0 else out


# --------------------------------------------------------------------------
# blend functions


@dataclass(frozen=True)
class BlendFunction:
    """phi1 for the blended kernel; phi2 = 1 - phi1.

    Either the power family ``1/(1 + y^m)`` (``m >= 1``) or a custom
    callable returning values in (0, 1).
    """

    m: float = 1.0
    custom: Callable | None = field(default=None, compare=False)
    label: str | None = None

    def __post_init__(self):
        if self.custom is None and not self.m >= 1:
            raise ValueError(f"blend exponent m must be >= 1, got {self.m}")

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        return f"m={self.m:g}" if self.custom is None else "custom"

    def log_phis(self, log_y):
        """(log phi1, log phi2) at y = exp(log_y)."""
        log_y = np.asarray(log_y, dtype=float)
        if self.custom is None:
            my = self.m * log_y
            return -np.logaddexp(0.0, my), -np.logaddexp(0.0, -my)
        p1 = np.asarray(self.custom(np.exp(log_y)), dtype=float)
        with np.errstate(divide="ignore"):
            return np.log(p1), np.log1p(-p1)

    def __call__(self, y):
        return np.exp(self.log_phis(np.log(np.asarray(y, dtype=float)))[0])

    def check_conditions(self) -> dict:
        """Spot-check positivity, phi1*y bounded at infinity and (1-phi1)/y bounded at 0."""
        grid = np.logspace(-8, 8, 161)
        p1 = self(grid)
        big = np.array([1e3, 1e6])
        small = np.array([1e-3, 1e-6])
        at_inf = self(big) * big
        at_zero = (1 - self(small)) / small
        return {
            "positive": bool(np.all((p1 > 0) & (p1 < 1))),
            "y_phi1_at_inf": at_inf.tolist(),
            "phi2_over_y_at_zero": at_zero.tolist(),
            "bounded": bool(at_inf[1] <= 10 * max(at_inf[0], 1) and at_zero[1] <= 10 * max(at_zero[0], 1)),
        }


DEFAULT_BLEND = BlendFunction(1.0)


def capital_phi(x, y, phi1: BlendFunction = DEFAULT_BLEND):
    """phi1(y) (y/x) + phi2(y) (x/y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(~(x > 0)) or np.any(~(y > 0)):
        raise NonPositiveArgument("capital_phi needs x, y > 0")
    lp1, lp2 = phi1.log_phis(np.log(y))
    w = np.log(y) - np.log(x)
    out = np.exp(np.logaddexp(lp1 + w, lp2 - w))
    return out[()] if out.ndim == 0 else out


# --------------------------------------------------------------------------
# point kernels


class Kernel(str, enum.Enum):
    R1 = "R1"
    R2 = "R2"
    R3 = "R3"
    R23 = "R23"


@dataclass(frozen=True)
class KernelSpec:
    which: Kernel
    phi1: BlendFunction = DEFAULT_BLEND

    def __post_init__(self):
        object.__setattr__(self, "which", Kernel(self.which))

    def check_alpha(self, alpha: complex) -> None:
        _check_alpha("r1" if self.which is Kernel.R1 else "r2", alpha)

    def to_json(self) -> dict:
        out = {"which": self.which.value}
        if self.which is Kernel.R23:
            out["phi1"] = self.phi1.name
        return out


def log_ratio_kernel(spec: KernelSpec, w, log_x, alpha: complex):
    """Complex log of x R(x, x e^w; alpha).

    This is the kernel weight in the ratio variable u = y/x: the integral
    of R(x, y) g(y) dy equals the integral of x R(x, x u) g(x u) du.
    ``log_x`` only matters for the blended kernel and broadcasts against
    ``w``.
    """
    w = np.asarray(w, dtype=float)
    which = spec.which
    if which is Kernel.R1:
        # symmetry: x R1(x, x u) = r1(u)
        return log_r1(w, alpha)
    minus = log_r1(w, -complex(alpha)) + 1j * math.pi
    if which is Kernel.R2:
        return minus + w
    if which is Kernel.R3:
        return minus - w
    lp1, lp2 = spec.phi1.log_phis(np.asarray(log_x, dtype=float) + w)
    return minus + np.logaddexp(lp1 + w, lp2 - w)


def resolvent_point(spec: KernelSpec, x, y, alpha: complex):
    """R(x, y; alpha) for the kernel named by ``spec``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(~(x > 0)) or np.any(~(y > 0)):
        raise NonPositiveArgument("kernel arguments must be > 0")
    spec.check_alpha(alpha)
    lx = np.log(x)
    out = np.exp(log_ratio_kernel(spec, np.log(y) - lx, lx, alpha) - lx)
    return out[()] if out.ndim == 0 else out


# --------------------------------------------------------------------------
# T^beta profile


def check_beta(beta: complex) -> None:
    if not -1 < complex(beta).real < 2:
        raise BetaOutOfRange(f"need -1 < Re beta < 2, got beta = {beta}")


def log_s_profile(L, beta: complex):
    """Complex log of s(e^L) = (u^beta - 1)/(u^2 - 1); -inf where beta = 0."""
    L = np.asarray(L, dtype=float)
    beta = complex(beta)
    if beta == 0:
        return np.full(L.shape, -np.inf, dtype=complex)
    return np.log(beta / 2) + log_q(beta * L) - log_q(2.0 * L)


def t_beta_profile(u, beta: complex):
    """s(u) = (u^2 - 1)^(-1) (u^beta - 1), with s(1) = beta/2."""
    u = np.asarray(u, dtype=float)
    if np.any(~(u > 0)):
        raise NonPositiveArgument("s(u) needs u > 0")
    check_beta(beta)
    out = np.exp(log_s_profile(np.log(u), beta))
    return out[()] if out.ndim == 0 else out


def log_pow_diff_quotient(a: complex, b: complex, L):
    """Complex log of (u^a - u^b)/(1 - u^2) at u = e^L (a != b)."""
    L = np.asarray(L, dtype=float)
    d = complex(a) - complex(b)
    return np.log(-d / 2) + complex(b) * L + log_q(d * L) - log_q(2.0 * L)


def log_log_quotient(L):
    """Complex log of u^(1/2) ln(u)/(1 - u^2) at u = e^L."""
    L = np.asarray(L, dtype=float)
    return 0.5 * L + math.log(0.5) + 1j * math.pi - log_q(2.0 * L)
