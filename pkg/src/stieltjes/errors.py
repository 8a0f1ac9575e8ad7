"""Exception hierarchy.

Every error carries a stable ``code`` string so the CLI can emit a
machine-readable JSON error object.
"""

from __future__ import annotations


class StieltjesError(Exception):
    code = "error"
    exit_code = 1

    def to_json(self) -> dict:
        return {"error": {"code": self.code, "message": str(self)}}


class BranchValidationFailed(StieltjesError):
    code = "branch_validation_failed"


class AlphaOutOfStrip(StieltjesError, ValueError):
    code = "alpha_out_of_strip"


class AlphaOutOfRange(StieltjesError, ValueError):
    code = "alpha_out_of_range"


class NonPositiveArgument(StieltjesError, ValueError):
    code = "non_positive_argument"


class BetaOutOfRange(StieltjesError, ValueError):
    code = "beta_out_of_range"


class NonFiniteSample(StieltjesError, FloatingPointError):
    code = "non_finite_sample"


class NormDiverged(StieltjesError):
    code = "norm_diverged"


class PureImagUnsolvable(StieltjesError):
    """Re(lambda) = 0, lambda != 0 has no general solution in E."""

    code = "pure_imaginary_unsolvable"
    exit_code = 3


class RegionBoundary(StieltjesError, ValueError):
    code = "region_boundary"


class ParseError(StieltjesError, ValueError):
    code = "parse_error"
    exit_code = 2

    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position

    def to_json(self) -> dict:
        out = super().to_json()
        out["error"]["position"] = self.position
        return out


class TableError(StieltjesError, ValueError):
    code = "table_error"
    exit_code = 2


class ConfigError(StieltjesError, ValueError):
    code = "config_error"
    exit_code = 2


class QuadratureWarning(RuntimeWarning):
    """Issued when an integral did not reach the requested tolerance."""
