"""Exception hierarchy shared across the pipeline."""


class PipelineError(Exception):
    """Base class for every error this package raises deliberately."""


class ContractError(PipelineError):
    """An argument or precondition violation."""


class SampleTooSmallError(ContractError):
    """Too few observations for the requested statistic."""


class DegenerateDataError(ContractError):
    """Input carries no usable variation (e.g. a constant sequence)."""


class ParseError(PipelineError):
    """A malformed input line; carries the 1-based line number when known."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class DuplicateTimestampError(PipelineError):
    """Two records claim the same timestamp for one station."""


class EmptyInputError(PipelineError):
    """No usable rows or values in the input."""


class ImputationError(PipelineError):
    """A gap cannot be filled; the message names the offending block."""
