"""Parameterisation lambda = sin(pi alpha)/pi with |Re alpha| <= 1/2."""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

from .errors import AlphaOutOfStrip, BranchValidationFailed

REGIME_TOL = 1e-12
ROUND_TRIP_TOL = 1e-12
STRIP_TOL = 1e-12


class Regime(str, enum.Enum):
    NEG_RE = "NegRe"
    NEG_RE_LOG = "NegReLog"
    POS_RE = "PosRe"
    POS_RE_LOG = "PosReLog"
    ZERO = "Zero"
    PURE_IMAG = "PureImag"

    @property
    def is_log(self) -> bool:
        return self in (Regime.NEG_RE_LOG, Regime.POS_RE_LOG)

    @property
    def positive(self) -> bool:
        return self in (Regime.POS_RE, Regime.POS_RE_LOG)

    @property
    def negative(self) -> bool:
        return self in (Regime.NEG_RE, Regime.NEG_RE_LOG)


@dataclass(frozen=True)
class SpectralParam:
    lam: complex
    alpha: complex
    regime: Regime

    def to_json(self) -> dict:
        return {
            "lambda": [self.lam.real, self.lam.imag],
            "alpha": [self.alpha.real, self.alpha.imag],
            "regime": self.regime.value,
        }


def lambda_from_alpha(alpha: complex) -> complex:
    alpha = complex(alpha)
    if abs(alpha.real) > 0.5 + STRIP_TOL:
        raise AlphaOutOfStrip(f"|Re alpha| = {abs(alpha.real):.6g} exceeds 1/2")
    return cmath.sin(math.pi * alpha) / math.pi


def _classify(lam: complex) -> Regime:
    if abs(lam) <= REGIME_TOL:
        return Regime.ZERO
    if abs(lam - 1 / math.pi) <= REGIME_TOL:
        return Regime.POS_RE_LOG
    if abs(lam + 1 / math.pi) <= REGIME_TOL:
        return Regime.NEG_RE_LOG
    if abs(lam.real) <= REGIME_TOL:
        return Regime.PURE_IMAG
    return Regime.POS_RE if lam.real > 0 else Regime.NEG_RE


def _sign(v: float) -> int:
    return (v > 0) - (v < 0)


def _reduce(a: complex) -> complex:
    # shift by whole periods of sin(pi a) (period 2) towards the strip
    re = a.real - 2.0 * round(a.real / 2.0)
    return complex(re, a.imag)


def alpha_from_lambda(lam: complex) -> SpectralParam:
    """Return the admissible ``alpha`` for ``lam`` together with its regime.

    The principal arcsin is tried first; if its real part has the wrong
    sign, the reflections ``-a``, ``1 - a`` and ``-1 - a`` (reduced into
    the strip) are tried in that order.  The candidate must reproduce
    ``lam`` to a relative error of 1e-12.
    """
    lam = complex(lam)
    if not (math.isfinite(lam.real) and math.isfinite(lam.imag)):
        raise ValueError(f"lambda must be finite, got {lam!r}")
    regime = _classify(lam)
    if regime is Regime.ZERO:
        return SpectralParam(lam, 0j, regime)
    if regime is Regime.POS_RE_LOG:
        return SpectralParam(lam, 0.5 + 0j, regime)
    if regime is Regime.NEG_RE_LOG:
        return SpectralParam(lam, -0.5 + 0j, regime)

    a0 = cmath.asin(math.pi * lam) / math.pi
    want = _sign(lam.real) if regime is not Regime.PURE_IMAG else 0
    for cand in (a0, -a0, _reduce(1 - a0), _reduce(-1 - a0)):
        if abs(cand.real) > 0.5 + STRIP_TOL:
            continue
        if want and _sign(cand.real) != want:
            continue
        back = cmath.sin(math.pi * cand) / math.pi
        if abs(back - lam) <= ROUND_TRIP_TOL * abs(lam):
            return SpectralParam(lam, cand, regime)
    raise BranchValidationFailed(f"no branch of arcsin reproduces lambda = {lam!r}")
