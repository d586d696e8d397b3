"""Exception hierarchy shared by every module of the package."""


class FracprojError(Exception):
    """Base class for all errors raised by fracproj."""


class NonIntegralExponent(FracprojError):
    """A power of m required by the construction is not an integer."""


class BadOrder(FracprojError):
    """The dimension parameters violate 0 < tau < t <= 1."""


class IntegralityFailure(FracprojError):
    """A quantity that must be an integer for the chosen delta is not."""


class SizeLimit(FracprojError):
    """An enumeration would exceed the configured point budget."""


class BadDigits(FracprojError):
    """A digit list has the wrong length, repeats, or leaves its range."""


class ScaleTooFine(FracprojError):
    """A covering scale is finer than the resolution of the truncated set."""


class EmptySet(FracprojError):
    """An operation received an empty set or measure."""


class NotUniform(FracprojError):
    """A set expected to have constant branching does not."""


class ZeroMass(FracprojError):
    """A restriction of a measure carries no mass."""


class BadLevel(FracprojError):
    """A construction level is outside 1..depth."""


class ConfigError(FracprojError):
    """An experiment configuration is malformed."""
