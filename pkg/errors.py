"""
Exception types raised by the simulator.
Verification failures are reported, not raised.
"""


class OntologyError(ValueError):
    """Base class for all simulator errors."""


class SiteRangeError(OntologyError):
    """A site index lies outside 1..2S."""


class ConfigMismatchError(OntologyError):
    """A state does not match the chain configuration it is used with."""


class SystemSizeError(OntologyError):
    """The requested system is too large for the chosen representation."""


class UnsupportedConfigurationError(OntologyError):
    """The operation is only defined for a restricted configuration."""


class DegenerateSizeError(OntologyError):
    """The chain is too small for the requested construction."""


class NormalizationError(OntologyError):
    """A quantum state does not have unit norm."""
