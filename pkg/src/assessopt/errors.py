"""Exception types shared across the pipeline, with file/line context where known."""

from __future__ import annotations


class ParseError(Exception):
    """An input file is missing, unreadable, or contains an uninterpretable row."""

    def __init__(self, message: str, file: str | None = None, line: int | None = None):
        self.file = file
        self.line = line
        if file is not None and line is not None:
            message = f"{file}:{line}: {message}"
        elif file is not None:
            message = f"{file}: {message}"
        super().__init__(message)


class ValidationError(Exception):
    """Inputs parse but violate structural invariants; carries every violation found."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations) or "validation failed")


class MissingDistributionError(LookupError):
    """No reference distribution is stored for the resolved lookup key."""


class PeerReviewOnlyUdaError(Exception):
    """Scoring was requested for a disciplinary area outside the bibliometric range 1-9."""


class MismatchedCorpusError(Exception):
    """Report inputs were computed on different corpora."""
