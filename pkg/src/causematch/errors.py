"""Exception types shared across the pipeline."""

from __future__ import annotations


class CauseMatchError(Exception):
    """Base class for all errors raised by this package."""


class InvalidFetchUrl(CauseMatchError):
    """The fetch URL is not an absolute http(s) URL."""


class EmptyDocument(CauseMatchError):
    """No usable text: empty token list, or no text block scored above zero."""


class InvalidRadius(CauseMatchError):
    """Near-duplicate query radius outside the supported 0..8 range."""


class FormatError(CauseMatchError):
    """A binary artifact (index snapshot, model file) failed magic/size checks."""


class ParseError(CauseMatchError):
    """Structural error in a rule file.  Carries the offending line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


class ValidationError(CauseMatchError):
    """Semantic problems in a rule file, all collected before raising."""

    def __init__(self, diagnostics: list["Diagnostic"]):
        super().__init__("; ".join(str(d) for d in diagnostics))
        self.diagnostics = diagnostics


class Diagnostic:
    """One line-numbered validation message."""

    def __init__(self, line: int, message: str):
        self.line = line
        self.message = message

    def __str__(self) -> str:
        return f"line {self.line}: {self.message}"

    def __repr__(self) -> str:
        return f"Diagnostic(line={self.line}, message={self.message!r})"


class FactTypeError(CauseMatchError):
    """A rule condition compared incompatible value types (strict mode only)."""


class EntityLoadError(CauseMatchError):
    """Problems found while loading an entity fixture, reported together.

    Each problem is a (kind, message) pair where kind is one of
    ``duplicate_id`` or ``malformed``.
    """

    DUPLICATE_ID = "duplicate_id"
    MALFORMED = "malformed"

    def __init__(self, problems: list[tuple[str, str]]):
        super().__init__("; ".join(f"{kind}: {msg}" for kind, msg in problems))
        self.problems = problems

    def kinds(self) -> set[str]:
        return {kind for kind, _ in self.problems}


class EmptyClass(CauseMatchError):
    """Training data left one or more taxonomy classes without documents."""

    def __init__(self, classes: list[str]):
        super().__init__(f"no training documents for classes: {', '.join(classes)}")
        self.classes = classes


class InvalidAlpha(CauseMatchError):
    """Smoothing constant must be > 0."""


class UnknownLabel(CauseMatchError):
    """A document label lies outside the model's taxonomy."""


class FetchError(CauseMatchError):
    """The advice service could not fetch the article URL."""


class UnknownPublisher(CauseMatchError):
    """The request named a publisher absent from configuration."""
