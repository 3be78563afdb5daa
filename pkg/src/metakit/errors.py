"""Exception types shared across the toolkit.

Everything derives from MetakitError (a ValueError) so callers can catch
one base class; the CLI maps these to exit code 1.
"""


class MetakitError(ValueError):
    """Base class for all validation and analysis errors."""


class SchemaError(MetakitError):
    """An input file does not match the expected header or key layout."""


class StudyValidationError(MetakitError):
    """A study record violates a field invariant."""

    def __init__(self, message: str, study_id: str | None = None, field: str | None = None):
        super().__init__(message)
        self.study_id = study_id
        self.field = field


class DuplicateStudyError(MetakitError):
    """The same study_id appears more than once in a dataset."""


class ConsistencyError(MetakitError):
    """Screening-flow counts violate an accounting identity."""


class MeasureMismatchError(MetakitError):
    """Effects with different measures were combined in one analysis."""


class InsufficientStudiesError(MetakitError):
    """An operation requires more studies than were supplied."""


class DegenerateStudyError(MetakitError):
    """The requested statistic is undefined for this input (zero spread, empty cells)."""


class ConvergenceError(MetakitError):
    """An iterative procedure hit its iteration cap without stabilizing."""

    def __init__(self, message: str, k0: int):
        super().__init__(message)
        self.k0 = k0
