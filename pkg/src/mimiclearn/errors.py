"""Exception types shared across the package.

The CLI maps these onto exit codes: DataError -> 2, everything pipeline-side
(PipelineError and subclasses) -> 3, usage problems -> 1.
"""


class DataError(Exception):
    """Malformed input data: bad CSV rows, schema mismatches, invalid splits."""


class PipelineError(Exception):
    """Failure inside the teacher/student pipeline or model handling."""


class PrivacyError(PipelineError):
    """An operation would expose a model or rows that must stay private."""


class ModelFormatError(PipelineError):
    """A model file is unreadable, unsupported, or violates its invariants."""
