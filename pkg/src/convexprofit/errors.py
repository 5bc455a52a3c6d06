"""Exception types shared across the package."""


class ConvexProfitError(Exception):
    """Base class for package errors."""


class InvalidCost(ConvexProfitError):
    """Cost model violates a structural requirement (e.g. unbounded conjugate)."""


class CurveRangeExceeded(ConvexProfitError):
    """No finite root found within the geometric bracket cap."""


class RequiresSeparable(ConvexProfitError):
    """Operation is only defined for separable cost models."""


class NoGoodClassifier(ConvexProfitError):
    """The classifier search found no usable point on the curve."""


class TooLarge(ConvexProfitError):
    """Instance exceeds the cap of an exhaustive oracle."""
