"""Exception hierarchy shared across the package."""


class SamplingError(Exception):
    """Base class for all errors raised by this package."""


class ContractViolation(SamplingError):
    """An oracle returned a value outside its documented range."""


class DegenerateOutcome(SamplingError):
    """The mixture density vanished at an outcome drawn from the mixture."""


class BoundViolation(SamplingError):
    """The density ratio exceeded the uniform bound ``K``."""


class BudgetExhausted(SamplingError):
    """Every trial in the allotted budget was rejected."""


class ZeroMassPrefix(SamplingError):
    """A bit prefix with zero probability mass was entered."""


class InvalidState(SamplingError, ValueError):
    """A covariance matrix / displacement pair is not a valid pure state."""


class NonSymmetric(InvalidState):
    pass


class NotPositiveDefinite(InvalidState):
    pass


class NotPure(InvalidState):
    pass


class NumericalError(SamplingError):
    """A factorization failed on a matrix that should have been well posed."""


class UnsupportedOverlap(SamplingError):
    """Overlaps of entangled multimode Gaussian states are not supported."""


class TailMassError(SamplingError, ValueError):
    """A truncated expansion discards more weight than allowed."""


class InvalidPOVM(SamplingError, ValueError):
    """Effects are not Hermitian PSD or do not sum to the identity."""


class NonOrthogonal(SamplingError, ValueError):
    """Components expected to be orthonormal are not."""


class ZeroNorm(SamplingError):
    """A randomly drawn vector cancelled to zero norm; the draw should be retried."""


class MaxAttemptsExceeded(SamplingError):
    """A retry loop ran out of attempts."""
