"""Exception hierarchy for curvlab.

Every failure mode of the numerical machinery maps to one of these, so
callers (and the CLI) can distinguish bad input from numerical breakdown.
"""


class CurvlabError(Exception):
    """Base class for all curvlab errors."""


class DomainError(CurvlabError, ValueError):
    """Input outside the mathematical domain of an operation."""


class RangeError(CurvlabError, ValueError):
    """Target value outside the attainable range (e.g. inverse of a
    monotone map queried outside its image)."""


class DegeneracyError(CurvlabError):
    """A quantity that must be nonzero/positive for validity vanished
    (weighted area, transversality denominator, ...)."""


class ConvergenceError(CurvlabError):
    """An iterative solve failed; carries diagnostics in ``details``."""

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class AccuracyError(CurvlabError):
    """A quadrature or series did not reach its accuracy target.

    ``estimate`` holds the best available error estimate.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class AmbiguityError(CurvlabError):
    """More than one answer in the requested bracket; ``candidates``
    lists all of them."""

    def __init__(self, message, candidates=()):
        super().__init__(message)
        self.candidates = list(candidates)


class InsufficientDataError(CurvlabError):
    """Not enough samples to perform a fit or estimate."""


class IntegrationError(CurvlabError):
    """Time integration failed; ``last_state`` and ``last_time`` hold the
    final valid point of the trajectory."""

    def __init__(self, message, last_time=None, last_state=None, trajectory=None):
        super().__init__(message)
        self.last_time = last_time
        self.last_state = last_state
        self.trajectory = trajectory


class ConfigError(CurvlabError, ValueError):
    """Malformed run configuration; ``key`` names the offending entry."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
