"""Exception types shared across the package."""

from __future__ import annotations


class RelboundError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(RelboundError):
    """An input object violates one of its structural invariants."""


class NotHermitian(ValidationError):
    def __init__(self, residual: float):
        super().__init__(f"matrix is not Hermitian: max |M - M^dag| entry = {residual:.3e}")
        self.residual = residual


class NotPSD(ValidationError):
    def __init__(self, residual: float):
        super().__init__(f"matrix is not positive semidefinite: min eigenvalue = {residual:.3e}")
        self.residual = residual


class TraceNotOne(ValidationError):
    def __init__(self, residual: float):
        super().__init__(f"trace differs from 1 by {residual:.3e}")
        self.residual = residual


class NegativePowerOfSingular(RelboundError):
    """Negative fractional power requested for a rank-deficient operator."""


class DisjointSupports(RelboundError):
    """The two operators are perfectly distinguishable; the requested quantity is infinite."""


class NoConvergence(RelboundError):
    """Iterative solver stopped before reaching its tolerance.

    Carries the best iterate found so far in ``result``.
    """

    def __init__(self, message: str, result=None):
        super().__init__(message)
        self.result = result


class Infeasible(RelboundError):
    """Semidefinite program reported infeasible."""


class NumericalFailure(RelboundError):
    def __init__(self, message: str, gap: float | None = None):
        super().__init__(message)
        self.gap = gap


class CertificateFailure(RelboundError):
    """A dual certificate did not verify within tolerance."""


class NonNegativityViolated(RelboundError):
    """Representation vectors have a negative pairwise inner product."""


class TooLarge(RelboundError):
    """Problem size exceeds the configured exhaustive-enumeration cap."""


class ParseError(RelboundError):
    """Malformed input file; the message points at the offending line or field."""


class GridMismatch(RelboundError):
    """Curves to be compared do not share a common rate grid."""
