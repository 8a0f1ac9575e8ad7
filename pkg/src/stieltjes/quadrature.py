"""Adaptive Gauss-Kronrod integration over (0, inf).

Integrals are computed in the logarithmic ratio coordinate w = ln u.  The
half-line is cut into the panels

    (0, s(1-d)) | [s(1-d), s(1+d)] | (s(1+d), u_max) | [u_max, inf)

around a declared removable point ``s``.  The outer panel is the image of
(0, 1/u_max] under u -> 1/u; both endpoint panels are then integrated in
the logarithmic coordinate, which turns algebraic endpoint behaviour into
exponential decay.  The coordinate range is capped where double precision
runs out (|ln y| <= log_extent in the physical variable); what lies beyond
is added by a fitted power-law or exponential remainder with a Richardson
correction, which is what makes integrands like 1/(y ln^2 y) tractable.

Many integrals that share a panel layout (the same integrand family at
different evaluation points) are refined on one common mesh, so every
integrand call is a single vectorised evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, NonFiniteSample

LOG_EXTENT = 700.0
PLAIN_LOG_EXTENT = 200.0

# 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15)
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:7], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:7], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[[1, 3, 5]] = _WG[:3]
GAUSS_WEIGHTS[7] = _WG[3]
GAUSS_WEIGHTS[[9, 11, 13]] = _WG[2::-1]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadConfig:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-13
    max_subdivisions: int = 2000
    diagonal_window: float = 1e-3
    u_max: float = 1e4
    tail_policy: str = "invert_above_u"

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ConfigError("rel_tol must be > 0")
        if not self.abs_tol >= 0:
            raise ConfigError("abs_tol must be >= 0")
        if not 0 < self.diagonal_window < 0.5:
            raise ConfigError("diagonal_window must lie in (0, 0.5)")
        if not self.u_max > 10:
            raise ConfigError("u_max must exceed 10")
        if self.max_subdivisions < 1:
            raise ConfigError("max_subdivisions must be positive")
        if self.tail_policy != "invert_above_u":
            raise ConfigError(f"unknown tail policy {self.tail_policy!r}")

    def with_(self, **kw) -> "QuadConfig":
        return replace(self, **kw)

    def to_json(self) -> dict:
        return {
            "rel_tol": self.rel_tol,
            "abs_tol": self.abs_tol,
            "max_subdivisions": self.max_subdivisions,
            "diagonal_window": self.diagonal_window,
            "u_max": self.u_max,
        }

    @classmethod
    def from_json(cls, d: dict) -> "QuadConfig":
        known = {"rel_tol", "abs_tol", "max_subdivisions", "diagonal_window", "u_max", "tail_policy"}
        bad = set(d) - known
        if bad:
            raise ConfigError(f"unknown quad keys: {sorted(bad)}")
        return cls(**d)


DEFAULT_CONFIG = QuadConfig()


@dataclass
class IntegralResult:
    value: complex
    abs_error_estimate: float
    subdivisions_used: int
    converged: bool

    def __complex__(self):
        return complex(self.value)

    def to_json(self) -> dict:
        v = complex(self.value)
        return {
            "value": [v.real, v.imag],
            "abs_error_estimate": float(self.abs_error_estimate),
            "subdivisions_used": int(self.subdivisions_used),
            "converged": bool(self.converged),
        }


@dataclass
class BatchResult:
    values: np.ndarray
    errors: np.ndarray
    converged: np.ndarray
    subdivisions_used: int
    tail: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.values)

    def item(self, i: int = 0) -> IntegralResult:
        return IntegralResult(
            complex(self.values[i]), float(self.errors[i]), self.subdivisions_used, bool(self.converged[i])
        )


def _gk15(G, a, b, batch):
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    w = (c[:, None] + h[:, None] * NODES[None, :]).ravel()
    vals = np.asarray(G(w), dtype=complex)
    if vals.ndim == 1:
        vals = vals[None, :]
    batch = max(batch, vals.shape[0])
    if vals.shape != (batch, w.size):
        vals = np.broadcast_to(vals, (batch, w.size))
    if not np.all(np.isfinite(vals)):
        bad = w[np.nonzero(~np.isfinite(vals))[1][0]]
        raise NonFiniteSample(f"integrand is not finite at log-coordinate {bad:.6g}")
    vals = vals.reshape(batch, a.size, 15)
    resk = vals @ KRONROD_WEIGHTS
    resg = vals @ GAUSS_WEIGHTS
    resabs = np.abs(vals) @ KRONROD_WEIGHTS
    resasc = np.abs(vals - 0.5 * resk[..., None]) @ KRONROD_WEIGHTS
    err = np.abs(resk - resg) * h
    resasc = resasc * h
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc != 0) & (err != 0), scaled, err)
    err = np.maximum(err, 50 * _EPS * resabs * h)
    return resk * h, err


def _breakpoints(s, cfg, w_lo, w_hi, extra=()):
    d = cfg.diagonal_window
    if s is None:
        s = 1.0
        diag = []
    else:
        diag = [math.log(s * (1 - d)), math.log(s * (1 + d))]
    lo_edge = math.log(s * (1 - d))
    hi_edge = math.log(s * (1 + d))
    tail = math.log(cfg.u_max)
    pts = set(diag)
    if w_lo >= lo_edge or w_hi <= hi_edge:
        raise ConfigError("log range too narrow for the panel layout")
    step = 1.0
    while lo_edge - step > w_lo:
        pts.add(lo_edge - step)
        step *= 2
    mid = [hi_edge + 1, hi_edge + 2, hi_edge + 4]
    pts.update(v for v in mid if v < min(tail, w_hi))
    start = hi_edge
    if tail < w_hi and tail > hi_edge:
        pts.add(tail)
        start = tail
    step = 1.0
    while start + step < w_hi:
        pts.add(start + step)
        step *= 2
    for v in (w_lo / 2, w_lo / 4, w_lo / 8, w_hi / 2, w_hi / 4, w_hi / 8):
        if w_lo < v < w_hi:
            pts.add(v)
    pts.update(v for v in extra if w_lo < v < w_hi)
    pts.update((w_lo, w_hi))
    return np.array(sorted(pts))


def _remainder(G, w_end, offset, sign, parts, target, batch):
    """Tail beyond the coordinate cap at one end.

    ``sign`` is +1 for the upper end and -1 for the lower end; physical
    distances are t = sign * (w + offset).  Samples at w_end / (1, 2, 4, 8)
    give local decay exponents and two Richardson-corrected power-law
    extrapolations of the tail, the second shifted by the integrated
    partial sums ``parts`` between its samples and the cap.  The first is
    returned; their difference, reduced by one order in t, is the error
    estimate.  An exponential model is used when the decay is not
    power-like.
    """
    ws = w_end / np.array([1.0, 2.0, 4.0, 8.0])
    vals = np.asarray(G(ws), dtype=complex)
    if vals.ndim == 1:
        vals = vals[None, :]
    vals = np.broadcast_to(vals, (batch, 4))
    t = np.broadcast_to(sign * (ws[None, :] + np.reshape(offset, (-1, 1))), (batch, 4))
    rem = np.zeros(batch, dtype=complex)
    err = np.zeros(batch)
    for i in range(batch):
        g, ti, part = vals[i], t[i], parts[i]
        if g[0] == 0 or abs(g[0]) * max(ti[0], 1.0) <= 1e-3 * _EPS * target[i]:
            continue
        if not (ti[0] > ti[1] > ti[2] > ti[3] > 0) or np.any(g == 0):
            err[i] = abs(g[0]) * max(ti[0], 1.0)
            continue
        lg = np.log(np.abs(g))
        drop = lg[1:] - lg[:-1]  # log decrease between successive samples
        if drop[0] <= 0:
            err[i] = np.inf
            continue
        p = drop / np.log(ti[:-1] / ti[1:])  # local power exponents
        if p[1] > 0 and 0.8 <= p[0] / p[1] <= 1.25:
            if np.any(p <= 1):
                err[i] = np.inf
                continue
            # naive tails beyond t_0 seen from the first three samples
            naive = g[:3] * ti[:3] / (p - 1) - part[:3]
            rho = (ti[:2] / ti[1:3]) ** p[:2]
            rich = naive[:2] + (naive[:2] - naive[1:]) / (rho - 1)
            rem[i] = rich[0]
            err[i] = abs(rich[0] - rich[1]) / (rho[0] - 1)
        else:
            k = drop / (ti[:-1] - ti[1:])
            rem[i] = g[0] / k[0]
            r_a = g[1] / k[1] - part[1] if k[1] > 0 else np.inf
            err[i] = abs(rem[i] - r_a)
        err[i] = max(err[i], 50 * _EPS * abs(rem[i]))
    return rem, err


def integrate_log(G, *, singular_u=None, cfg: QuadConfig | None = None, log_offset=0.0,
                  log_extent: float = LOG_EXTENT, breakpoints=()) -> BatchResult:
    """Integrate ``G(w)`` over the real line on a shared adaptive mesh.

    ``G`` receives a 1-D array of log-ratio coordinates w = ln u and
    returns an array of shape (batch, len(w)) (or (len(w),)); the
    Jacobian e^w must already be included.  ``log_offset`` (scalar or one
    value per batch member) is the physical log scale, so ln y = w +
    offset; the mesh is capped at |ln y| <= ``log_extent``.
    ``breakpoints`` are extra mesh points in the w coordinate (kinks).
    """
    cfg = cfg or DEFAULT_CONFIG
    offset = np.atleast_1d(np.asarray(log_offset, dtype=float))
    w_lo = -log_extent - offset.min()
    w_hi = log_extent - offset.max()
    edges = _breakpoints(singular_u, cfg, w_lo, w_hi, breakpoints)

    a, b = edges[:-1], edges[1:]
    res, err = _gk15(G, a, b, offset.size)
    batch = res.shape[0]
    splits = 0
    floor = 1e-12 * max(1.0, float(np.max(np.abs(edges))))
    while True:
        tot = res.sum(axis=1)
        etot = err.sum(axis=1)
        target = np.maximum(cfg.abs_tol, cfg.rel_tol * np.abs(tot))
        bad = etot > target
        if not bad.any() or splits >= cfg.max_subdivisions:
            break
        npan = a.size
        thresh = np.maximum(target / npan, 0.1 * err.max(axis=1))
        flag = ((err > thresh[:, None]) & bad[:, None]).any(axis=0)
        flag &= (b - a) > floor
        if not flag.any():
            break
        budget = cfg.max_subdivisions - splits
        idx = np.nonzero(flag)[0]
        if idx.size > budget:
            worst = err[:, idx].max(axis=0)
            idx = np.sort(idx[np.argsort(-worst)[:budget]])
        m = 0.5 * (a[idx] + b[idx])
        na = np.concatenate([a[idx], m])
        nb = np.concatenate([m, b[idx]])
        nres, nerr = _gk15(G, na, nb, batch)
        keep = np.ones(a.size, dtype=bool)
        keep[idx] = False
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        res = np.concatenate([res[:, keep], nres], axis=1)
        err = np.concatenate([err[:, keep], nerr], axis=1)
        order = np.argsort(a, kind="stable")
        a, b, res, err = a[order], b[order], res[:, order], err[:, order]
        splits += idx.size

    tot = res.sum(axis=1)
    etot = err.sum(axis=1)
    target = np.maximum(cfg.abs_tol, cfg.rel_tol * np.abs(tot))
    quad_ok = etot <= target

    # remainders beyond the coordinate cap
    def parts(masks):
        return np.stack([res[:, m].sum(axis=1) for m in masks], axis=1)

    fracs = (1.0, 2.0, 4.0, 8.0)
    rem_hi, rerr_hi = _remainder(G, w_hi, offset, +1, parts([a >= w_hi / d for d in fracs]), target, batch)
    rem_lo, rerr_lo = _remainder(G, w_lo, offset, -1, parts([b <= w_lo / d for d in fracs]), target, batch)
    values = tot + rem_hi + rem_lo
    errors = etot + rerr_hi + rerr_lo
    target = np.maximum(cfg.abs_tol, cfg.rel_tol * np.abs(values))
    converged = quad_ok & (errors <= target) & np.isfinite(errors)
    return BatchResult(
        values=values,
        errors=errors,
        converged=converged,
        subdivisions_used=splits,
        tail={"upper": rem_hi, "lower": rem_lo, "upper_err": rerr_hi, "lower_err": rerr_lo},
    )


def integrate_halfline(integrand, singular_u: float | None = None, cfg: QuadConfig | None = None,
                       log_extent: float = PLAIN_LOG_EXTENT, points=()) -> IntegralResult:
    """Integrate a vectorised ``integrand(u)`` over (0, inf).

    ``singular_u`` declares a removable point in the ratio variable
    (normally 1); ``points`` lists further u-values where the integrand
    has a kink or jump.  Non-convergence is reported through
    ``converged``.
    """

    def G(w):
        u = np.exp(w)
        return np.asarray(integrand(u), dtype=complex) * u

    extra = [math.log(p) for p in points]
    return integrate_log(G, singular_u=singular_u, cfg=cfg, log_extent=log_extent, breakpoints=extra).item(0)


def integrate_family(log_integrand, log_x, *, singular_u=None, cfg: QuadConfig | None = None,
                     log_extent: float = LOG_EXTENT, breakpoints=(), chunk: int = 256,
                     spread: float = 16.0) -> BatchResult:
    """Integrate ``exp(log_integrand(w, lx)) du`` over u for many log-points ``lx``.

    ``log_integrand`` receives broadcastable arrays w (shape (1, n)) and lx
    (shape (b, 1)) and returns the complex log of the integrand in the
    ratio variable u = e^w.  Points are sorted and grouped into chunks of
    similar scale, each refined on its own shared mesh; results come back
    in the original order.
    """
    lx = np.atleast_1d(np.asarray(log_x, dtype=float))
    n = lx.size
    values = np.zeros(n, dtype=complex)
    errors = np.zeros(n)
    conv = np.zeros(n, dtype=bool)
    subdiv = 0
    order = np.argsort(lx, kind="stable")
    start = 0
    while start < n:
        stop = start + 1
        first = lx[order[start]]
        while stop < n and stop - start < chunk and lx[order[stop]] - first <= spread:
            stop += 1
        idx = order[start:stop]
        sub = lx[idx][:, None]

        def G(w, sub=sub):
            with np.errstate(over="ignore", under="ignore"):
                return np.exp(log_integrand(w[None, :], sub) + w[None, :])

        res = integrate_log(G, singular_u=singular_u, cfg=cfg, log_offset=sub[:, 0],
                            log_extent=log_extent, breakpoints=breakpoints)
        values[idx] = res.values
        errors[idx] = res.errors
        conv[idx] = res.converged
        subdiv = max(subdiv, res.subdivisions_used)
        start = stop
    return BatchResult(values=values, errors=errors, converged=conv, subdivisions_used=subdiv)
