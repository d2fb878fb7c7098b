"""Exception types shared by all modules.

Each class maps to one CLI exit code (see ``cli.EXIT_CODES``).
"""


class SitnikovError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(SitnikovError, ValueError):
    """Malformed input string, config field or file."""


class DomainError(SitnikovError, ValueError):
    """Input outside the mathematical domain (e >= 1, negative time, ...)."""


class ResourceError(SitnikovError):
    """Budget exhausted before a result could be certified.

    This never means the answer is wrong, only that it was not certified
    within the configured step/precision caps.
    """

    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


class ShapeError(SitnikovError, ValueError):
    """A three-body state that is not of Sitnikov type."""


class InconsistencyError(SitnikovError):
    """A classified grid that violates the recovery preconditions."""

    def __init__(self, message, nodes=()):
        super().__init__(message)
        self.nodes = list(nodes)
