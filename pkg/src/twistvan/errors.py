"""Exception hierarchy mapped onto the CLI exit codes.

Exit codes: 0 ok, 2 configuration error, 3 numerical-contract violation
(classification gap, truncation stability), 4 I/O failure.
"""


class TwistvanError(Exception):
    exit_code = 1


class ConfigError(TwistvanError):
    """Bad curve model, family selector, or manifest input."""

    exit_code = 2


class CapacityError(ConfigError):
    """A requested table or batch exceeds the configured budget."""


class DomainError(ConfigError):
    """An operation was evaluated outside its mathematical domain."""


class NumericsError(TwistvanError):
    """A runtime-checked numerical contract failed."""

    exit_code = 3


class ClassificationError(NumericsError):
    """The zero/nonzero spectral gap fell below the required ratio."""

    def __init__(self, msg, largest_zero=None, smallest_nonzero=None):
        super().__init__(msg)
        self.largest_zero = largest_zero
        self.smallest_nonzero = smallest_nonzero


class TruncationError(NumericsError):
    """A truncated prime sum or product failed its stability check."""


class RecordIOError(TwistvanError):
    """Missing or malformed record/cache file."""

    exit_code = 4
