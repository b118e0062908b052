"""Exception hierarchy shared by the library and the CLI."""


class MkTwsvmError(Exception):
    """Base class for all errors raised by this package."""


class InputError(MkTwsvmError, ValueError):
    """Invalid argument: wrong shape, non-finite values, bad parameters."""


class DataError(MkTwsvmError):
    """A dataset cannot be used (empty after filtering, one class only, ...)."""


class FormatError(DataError):
    """A file does not follow its documented format.

    ``line`` and ``field`` locate the problem when known.
    """

    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.line = line
        self.field = field


class VersionError(FormatError):
    """A model file was written by an unsupported format version."""


class TrainingError(MkTwsvmError):
    """Training did not converge; ``diagnostics`` carries solver details."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
