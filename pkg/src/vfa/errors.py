"""Exception types raised by the library."""


class VFAError(ValueError):
    """Base class for all library errors."""


class DimensionMismatch(VFAError):
    pass


class FamilyMismatch(VFAError):
    pass


class NotUnitary(VFAError):
    pass


class InvalidDensity(VFAError):
    pass


class GridMismatch(VFAError):
    pass


class ArityMismatch(VFAError):
    pass


class EmptyLattice(VFAError):
    pass


class EncoderMismatch(VFAError):
    pass


class LengthMismatch(VFAError):
    pass


class EmptyFunction(VFAError):
    pass


class InvalidSpacing(VFAError):
    pass


class OptimizerDidNotBracket(VFAError):
    """The fine search ended on the edge of its interval (coarse mis-match)."""

    def __init__(self, message, r_hat=None):
        super().__init__(message)
        self.r_hat = r_hat


class NoConvergence(VFAError):
    pass


class NonPositiveGram(VFAError):
    pass


class SingularSystem(VFAError):
    pass


class DomainViolation(VFAError):
    pass


class SizeMismatch(VFAError):
    pass


class FormatError(VFAError):
    """Malformed serialized record or image file."""
