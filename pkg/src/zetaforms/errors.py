"""Error taxonomy shared by all modules.

Four families, kept deliberately coarse:

* ``ValidationError``   -- a caller handed us parameters outside the domain.
* ``VerificationError`` -- a mathematical invariant that must hold failed
                           (integrality, symmetry, residual too large, ...).
* ``NumericError``      -- a computation could not reach the requested
                           accuracy (precision exhaustion, nonconvergence,
                           evaluation too close to a pole).
* ``StructuralError``   -- an internally impossible configuration was
                           reached; indicates a bug, not bad input.
"""


class ZetaformsError(Exception):
    """Base class for everything raised on purpose by this package."""


class ValidationError(ZetaformsError):
    """Parameters outside the documented domain."""


class VerificationError(ZetaformsError):
    """An arithmetic invariant that must hold exactly (or to a certified
    tolerance) does not."""


class IntegralityError(VerificationError):
    """A quantity proved to be an integer failed the exact divisibility
    check."""


class NumericError(ZetaformsError):
    """Requested accuracy could not be certified."""


class PrecisionUnderflow(NumericError):
    """Propagated error bounds exceed what the requested output precision
    allows."""


class PoleProximityError(NumericError):
    """Evaluation point too close to a pole for the working precision."""


class ConvergenceError(NumericError):
    """An iterative solver (Newton, bisection bracketing, root finder)
    failed to converge; never silent."""


class StructuralError(ZetaformsError):
    """Impossible internal state (e.g. a root census with the wrong
    total count)."""
