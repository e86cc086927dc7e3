"""Weighted Beurling algebras on the torus and bidisc: series arithmetic,
certified inversion, constructive Bezout solutions and ideal diagnostics."""

from .errors import ConvergenceError, PreconditionError, SeriesFormatError, ToleranceError
from .series import (
    Series1D,
    Series2D,
    Weight,
    evaluate,
    local_division,
    multiply,
    partial_derivative,
    read_series,
    rho_scale,
    weighted_norm,
    write_series,
)
from .inversion import NormCertificate, c1_exponent_1d, c1_exponent_2d, invert
from .dbar import PolarGrid, PolarGridFunction, cauchy_coefficients, cauchy_transform_z, dbar_residual, sample
from .corona import BezoutSolution, CoronaGrid, CoronaIntermediates, bezout_solve, c2_certificate, delta_pair

__version__ = "0.1.0"

__all__ = [
    "BezoutSolution",
    "ConvergenceError",
    "CoronaGrid",
    "CoronaIntermediates",
    "NormCertificate",
    "PolarGrid",
    "PolarGridFunction",
    "PreconditionError",
    "Series1D",
    "Series2D",
    "SeriesFormatError",
    "ToleranceError",
    "Weight",
    "bezout_solve",
    "c1_exponent_1d",
    "c1_exponent_2d",
    "c2_certificate",
    "cauchy_coefficients",
    "cauchy_transform_z",
    "dbar_residual",
    "delta_pair",
    "evaluate",
    "invert",
    "local_division",
    "multiply",
    "partial_derivative",
    "read_series",
    "rho_scale",
    "sample",
    "weighted_norm",
    "write_series",
]
