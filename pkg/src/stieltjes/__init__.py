"""Explicit solutions of the Stieltjes integral equation on the half-line.

    f(x) = g(x) + lam * int_0^inf f(y) / (x + y) dy
"""

from .analysis import (
    SpaceSpec,
    apply_stieltjes,
    check_s_bound,
    fit_growth,
    mellin,
    mellin_convolve,
    norm,
    t_beta_apply,
)
from .errors import (
    AlphaOutOfRange,
    AlphaOutOfStrip,
    BetaOutOfRange,
    BranchValidationFailed,
    NonFiniteSample,
    NonPositiveArgument,
    NormDiverged,
    ParseError,
    PureImagUnsolvable,
    QuadratureWarning,
    RegionBoundary,
    StieltjesError,
    TableError,
)
from .functions import HalfLineFunction, Table, parse_gspec
from .kernels import BlendFunction, Kernel, KernelSpec, capital_phi, r_profile, resolvent_point, t_beta_profile
from .quadrature import IntegralResult, QuadConfig, integrate_halfline
from .solver import (
    ResidualReport,
    Solution,
    apply_resolvent,
    homogeneous_solution,
    residual_check,
    solve_E,
    solve_Ek,
)
from .spectral import Regime, SpectralParam, alpha_from_lambda, lambda_from_alpha

__version__ = "0.1.0"
