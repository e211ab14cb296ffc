"""Domain error types. Each carries a short category string for CLI diagnostics."""


class SurveyTaxError(Exception):
    """Base class for all domain errors raised by this package."""

    category = "error"


class ParseError(SurveyTaxError, ValueError):
    """Structurally malformed input (bad JSON, missing field)."""

    category = "parse"

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class ValidationError(SurveyTaxError, ValueError):
    """Well-formed input that violates a domain invariant."""

    category = "validation"


class TransportError(SurveyTaxError):
    """A chat-completion transport failed to produce a response."""

    category = "transport"
