"""Orthogonal data-hiding states: commutant coordinates, PPT-norm linear
programs and closed-form LOCC bounds."""

from .bounds import dim_for_eps, mu, parity_upper_bound, spectral
from .commutant import CommutantOp, apply_pt, even_odd, pt_matrix, sigma_pair
from .errors import (
    InvalidDimensionError,
    OrthohideError,
    PreconditionError,
    ResourceLimitError,
    ShapeError,
    SolverError,
)
from .ppt_lp import ppt_norm

__all__ = [
    "CommutantOp", "InvalidDimensionError", "OrthohideError", "PreconditionError",
    "ResourceLimitError", "ShapeError", "SolverError", "apply_pt", "dim_for_eps",
    "even_odd", "mu", "parity_upper_bound", "ppt_norm", "pt_matrix", "sigma_pair",
    "spectral",
]
