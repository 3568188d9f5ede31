"""
Exception hierarchy for asdgic-lattice.

Every error raised by the formula layer, the lattice layer and the simulator
derives from ChannelError, itself a ValueError, so callers that only care
about "bad input" can catch a single type. The CLI maps these to exit codes.
"""


class ChannelError(ValueError):
    """Base class for all domain errors."""


class NonPositiveValueError(ChannelError):
    """A power, noise variance or finite state variance is not positive."""


class NegativeGainError(ChannelError):
    """An interference link gain is negative."""


class ConditionNotMetError(ChannelError):
    """A regime condition required by the requested formula does not hold."""


class NoApplicableRegimeError(ChannelError):
    """A decoder satisfies neither the imbalanced nor the balanced condition."""


class UnboundedStateError(ChannelError):
    """A closed form needs a finite state variance but got ``unbounded``."""


class UnsupportedDimensionError(ChannelError):
    """Lattice dimension not supported by the requested family or decoder."""


class NonPositiveScaleError(ChannelError):
    """Lattice scale factor must be strictly positive."""


class UnsortedGridError(ChannelError):
    """Envelope grid is not strictly increasing."""


class TooFewPointsError(ChannelError):
    """Envelope grid has fewer than two points."""


class InvalidGridError(ChannelError):
    """Coefficient sweep grid does not satisfy its size/range requirements."""


class LatticeRelationViolatedError(ChannelError):
    """The nested lattice chain for a scheme could not be constructed."""


class UnsupportedSchemeError(ChannelError):
    """Unknown transceiver scheme tag."""


class UnsupportedFamilyError(ChannelError):
    """Lattice family not usable for the requested operation."""


class NonFiniteValueError(ChannelError):
    """A channel constant is infinite or NaN."""


class InvalidDecoderError(ChannelError):
    """Decoder index other than 1 or 2."""


class BasisError(ChannelError):
    """Generator matrix missing or not full rank."""
