"""zetaforms: exact linear forms in Hurwitz zeta values, their saddle-point
asymptotics, and the resulting dimension lower bounds.

The package splits into an exact layer (params, linform), a certified
numerical layer (hurwitz, cotk, quadrature), the saddle-point machinery
(saddle), the arithmetic consequences (bound), and a command line front
end (cli).
"""

from .errors import (
    ConvergenceError,
    IntegralityError,
    NumericError,
    PoleProximityError,
    PrecisionUnderflow,
    StructuralError,
    ValidationError,
    VerificationError,
    ZetaformsError,
)
from .params import Params, PrecisionPolicy, required_precision, validate

__all__ = [
    "ConvergenceError",
    "IntegralityError",
    "NumericError",
    "Params",
    "PoleProximityError",
    "PrecisionPolicy",
    "PrecisionUnderflow",
    "StructuralError",
    "ValidationError",
    "VerificationError",
    "ZetaformsError",
    "required_precision",
    "validate",
]

__version__ = "0.1.0"
