"""Exception types shared across the package."""


class DemoulinError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(DemoulinError):
    """Syntax or lexical error in an expression string.

    Carries the byte offset of the failure and a short description of
    what was expected there.
    """

    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class EvalDomainError(DemoulinError):
    """Scalar evaluation hit a domain violation (log of a non-positive
    value, division by zero).  The message names the offending subtree."""


class DegenerateCoefficientError(DemoulinError):
    """|b| or |c| fell below tolerance somewhere on the scan region; the
    canonical system degenerates (ruled case) and is rejected."""


class DomainBoundaryError(DemoulinError):
    """A finite-difference stencil or integration path left the domain."""


class SingularMatrixError(DemoulinError):
    """Matrix inversion requested for a (numerically) singular matrix."""


class NonUnimodularFrameError(DemoulinError):
    """Frame determinant too far from 1 for a unimodular-frame operation."""


class ChartError(DemoulinError):
    """Affine chart broke down: the homogeneous coordinate f0 vanished."""


class NotDemoulinError(DemoulinError):
    """Operation requires a Demoulin jet (P = Q = 0) and got a jet with a
    nonzero reduced invariant."""


class ConsistencyError(DemoulinError):
    """Two independent internal computation routes disagreed.  This always
    indicates an implementation bug, never bad user input."""


class ConfigError(DemoulinError):
    """Malformed or inconsistent configuration file."""
