"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes, so every user-facing failure should be
raised as one of the classes below rather than a bare builtin.
"""

from __future__ import annotations


class ArdmError(Exception):
    """Base class for all package errors."""


class UserError(ArdmError):
    """Bad invocation or reference to something that does not exist."""


class DataError(ArdmError):
    """Input data or stored state does not meet expectations."""


class ParseError(DataError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DomainError(DataError):
    """A value lies outside the domain an operation accepts."""


class ValidationRejected(DataError):
    def __init__(self, report):
        self.report = report
        errors = [i.message for i in report.issues if i.severity == "error"]
        super().__init__(f"{report.dataset_ref}: validation failed: " + "; ".join(errors))


class SchemaVersionError(DataError):
    pass


class ParamSchemaError(UserError):
    pass


class DefinitionError(UserError):
    """An analysis standard definition is malformed or conflicts with the registry."""


class AnalysisFailed(DataError):
    """A run could not produce results; the failed run row has been recorded."""

    def __init__(self, message: str, run=None):
        self.run = run
        super().__init__(message)


class DuplicateResultError(DataError):
    pass


class NotFoundError(UserError):
    pass


class OpenError(UserError):
    pass


class LockError(UserError):
    pass


class RenderError(UserError):
    pass


class PivotError(RenderError):
    pass
