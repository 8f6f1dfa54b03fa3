"""Shift-invariant spans of compactly supported piecewise polynomials.

Exact piecewise-polynomial algebra, entire Fourier transforms and their
zeros, zero removal by convolution quotients, delta-sequence checks and
density experiments with dual lower-bound certificates.
"""

from .errors import (
    ConfigError,
    ContourError,
    GridError,
    NumericalBudgetError,
    PreconditionError,
    ShiftSpanError,
)
from .fourier import Rect, ZeroAtlas, common_zeros, ft_derivative, ft_eval, v_subset_check, zero_search
from .opalg import OperatorQuotient, convolve_e_alpha, example_generators, op_support, remove_zero, titchmarsh_report
from .parallel import set_threads
from .pwfunc import (
    Grid,
    PiecewisePoly,
    add,
    build_indicator,
    build_poly_bump,
    convolve,
    from_function,
    l1_norm,
    project,
    reflect,
    scale,
    shift,
    support_endpoints,
)

__version__ = "0.1.0"

__all__ = [
    "add",
    "build_indicator",
    "build_poly_bump",
    "common_zeros",
    "ConfigError",
    "ContourError",
    "convolve",
    "convolve_e_alpha",
    "example_generators",
    "from_function",
    "ft_derivative",
    "ft_eval",
    "Grid",
    "GridError",
    "l1_norm",
    "NumericalBudgetError",
    "op_support",
    "OperatorQuotient",
    "PiecewisePoly",
    "PreconditionError",
    "project",
    "Rect",
    "reflect",
    "remove_zero",
    "scale",
    "set_threads",
    "shift",
    "ShiftSpanError",
    "support_endpoints",
    "titchmarsh_report",
    "v_subset_check",
    "zero_search",
    "ZeroAtlas",
]
