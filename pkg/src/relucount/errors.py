"""Exception types shared across the package."""


class VerifierError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(VerifierError):
    """Vector/matrix sizes do not line up with the declared dimensions."""


class MalformedModel(VerifierError):
    """A model document or NNet file does not follow its format."""


class NonFiniteWeight(VerifierError):
    """A weight or bias is NaN or infinite."""


class MalformedProperty(VerifierError):
    """A property document does not follow its format."""


class IndexOutOfRange(VerifierError):
    """An output index falls outside the network's output range."""


class DegenerateDimension(VerifierError):
    """Requested a bisection of a zero-width dimension."""


class NotContained(VerifierError):
    """A box claimed as a sub-box sticks out of its parent."""


class InvalidBounds(VerifierError):
    """Lower bound exceeds upper bound."""


class GridTooLarge(VerifierError):
    """The requested grid has too many points to enumerate."""


class InvalidEpsilon(VerifierError):
    """Epsilon outside the range supported by the constructed network."""
