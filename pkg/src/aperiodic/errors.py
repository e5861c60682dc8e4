"""Exception types shared across the package."""


class AperiodicError(Exception):
    """Base class for all package-specific errors."""


class OutOfRangeError(AperiodicError):
    """A quantile query fell outside the tabulated value range."""


class DegenerateFitError(AperiodicError):
    """A log-log fit was requested on data with no spread."""


class TooFewResolvedError(AperiodicError):
    """Not enough resolved profile entries to estimate a growth rate."""


class NotHyperbolicError(AperiodicError):
    """The isometry is not of hyperbolic type (|trace| <= 2)."""


class DomainError(AperiodicError):
    """A point lies outside the upper half-plane."""


class PreconditionFailedError(AperiodicError):
    """A documented precondition of the operation does not hold."""


class HypothesisFailedError(AperiodicError):
    """The shadowing hypothesis of the closing-lemma check is violated.

    This marks a non-instance of the lemma, not a failure of its conclusion.
    """


class MalformedEventError(AperiodicError):
    """A recurrence event handed to a closing checker fails its own premise."""


class ExhaustedError(AperiodicError):
    """The backtracking word search died before reaching the target length."""

    def __init__(self, message, nodes=0, max_depth=0):
        super().__init__(message)
        self.nodes = nodes
        self.max_depth = max_depth


class ConfigError(AperiodicError):
    """An experiment configuration failed validation.

    ``field`` names the offending entry so CLI errors stay actionable.
    """

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
