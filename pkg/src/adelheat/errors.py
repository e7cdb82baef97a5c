"""Exception hierarchy shared by the library and the CLI exit-code mapping."""


class AdelheatError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class UsageError(AdelheatError, ValueError):
    """Invalid argument, configuration or mismatched operands."""

    exit_code = 2


class PrecisionError(AdelheatError, ArithmeticError):
    """A requested accuracy cannot be certified with the available data."""

    exit_code = 3


class ResourceError(AdelheatError):
    """An index falls outside the configured filtration window."""

    exit_code = 3
