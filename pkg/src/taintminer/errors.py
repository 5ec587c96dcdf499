"""Exception and warning types raised across the pipeline."""

from __future__ import annotations


class TaintMinerError(Exception):
    """Base class for every error raised by this package."""


class SourceError(TaintMinerError):
    """A structural problem in the input source, tied to a line number."""

    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class UnterminatedBlockComment(SourceError):
    pass


class UnbalancedParens(SourceError):
    pass


class UnbalancedBrackets(SourceError):
    pass


class UnbalancedBraces(SourceError):
    pass


class EmptyCorpus(TaintMinerError):
    pass


class AppSetMismatch(TaintMinerError):
    pass


class ClassTooSmall(TaintMinerError):
    pass


class ColumnMismatch(TaintMinerError):
    pass


class InapplicableMutation(TaintMinerError):
    pass


class NoPreferences(UserWarning):
    """The app has no ``preferences`` block, so it declares no sources."""


class EmptySinkSet(UserWarning):
    """The sink file lists no sinks; mining will find nothing."""


class MalformedInput(UserWarning):
    """An ``input`` call whose arguments could not be read."""


class DegenerateTraining(UserWarning):
    """The training split holds a single class; the model is a constant."""
