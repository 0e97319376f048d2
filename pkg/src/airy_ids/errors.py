"""Exception taxonomy shared by the library and the CLI.

Exit-code mapping used by the CLI: ConfigError -> 2, PreconditionError -> 3,
IntegrityError -> 4, NumericError (incl. RangeError) -> 5.
"""


class AiryIdsError(Exception):
    """Base class for all library errors."""


class ConfigError(AiryIdsError):
    """Invalid run configuration (unknown keys, malformed values)."""

    exit_code = 2


class PreconditionError(AiryIdsError):
    """A documented precondition was violated (e.g. c below the required c_p)."""

    exit_code = 3


class IntegrityError(AiryIdsError):
    """A structural guarantee failed (wrong eigenvalue count, gap sign change).

    Carries optional diagnostic payload; this is an acceptance-level failure,
    not a recoverable state.
    """

    exit_code = 4

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class NumericError(AiryIdsError):
    """A numerical procedure failed to converge or left its trusted domain."""

    exit_code = 5

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class RangeError(NumericError):
    """Argument outside the evaluable range (e.g. Bi overflow for large x)."""
