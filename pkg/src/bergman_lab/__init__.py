"""Numerical toolkit for weighted Bergman kernels on the unit ball:
kernel series, Bergman-type projections of bounded symbols, Bloch-seminorm
diagnostics, and two-sided empirical checks that the projection is bounded
from L-infinity into the Bloch space exactly for tail-doubling radial
weights."""

from .analysis import (AnalysisConfig, TheoremReport, bloch_seminorm,
                       boundedness_functional, cesaro_lower,
                       hardy_littlewood_check, hardy_littlewood_converse,
                       lower_bound_series, majorant, moment_doubling_chain,
                       pr_estimate_check, theorem_check)
from .errors import (DescriptorError, NumericRangeError, QuadratureError,
                     SymbolFormError, TruncationError, WeightDomainError)
from .kernel import (KernelCoeffs, build_coeffs, eval_disk_kernel_deriv,
                     eval_g, eval_kernel, eval_rk, kernel_norm_sq,
                     rk_circle_mean)
from .projection import BoundedSymbol, project, project_bloch_image, verify_star
from .quadrature import (BallPoint, QuadSpec, inner, integrate_ball_radial,
                         integrate_disk, integrate_radial, sphere_slice_average)
from .weights import (DiagnosticsReport, MomentTable, RadialWeight,
                      dhat_beta_estimate, eval_weight, is_dhat_moments,
                      is_dhat_tail, is_regular, moment_tail_ratio, tail)

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig", "BallPoint", "BoundedSymbol", "DescriptorError",
    "DiagnosticsReport", "KernelCoeffs", "MomentTable", "NumericRangeError",
    "QuadSpec", "QuadratureError", "RadialWeight", "SymbolFormError",
    "TheoremReport", "TruncationError", "WeightDomainError",
    "bloch_seminorm", "boundedness_functional", "build_coeffs",
    "cesaro_lower", "dhat_beta_estimate", "eval_disk_kernel_deriv", "eval_g",
    "eval_kernel", "eval_rk", "eval_weight", "hardy_littlewood_check",
    "hardy_littlewood_converse", "inner", "integrate_ball_radial",
    "integrate_disk", "integrate_radial", "is_dhat_moments", "is_dhat_tail",
    "is_regular", "kernel_norm_sq", "lower_bound_series", "majorant",
    "moment_doubling_chain", "moment_tail_ratio", "pr_estimate_check",
    "project", "project_bloch_image", "rk_circle_mean",
    "sphere_slice_average", "tail", "theorem_check", "verify_star",
]
