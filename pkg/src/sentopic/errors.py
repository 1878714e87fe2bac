"""Exception hierarchy shared by all stages.

The CLI maps each family to an exit code: configuration problems exit 2,
bad input data exits 3 and numerical failures exit 4.
"""


class SentopicError(Exception):
    exit_code = 1


class ConfigError(SentopicError):
    exit_code = 2


class DataError(SentopicError):
    exit_code = 3

    def __init__(self, message, record_id=None):
        super().__init__(message)
        self.record_id = record_id


class NumericalError(SentopicError):
    exit_code = 4


class StageError(SentopicError):
    """Wraps a failure inside one pipeline stage."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        self.record_id = getattr(cause, "record_id", None)
        self.exit_code = getattr(cause, "exit_code", 1)
        detail = f"[{stage}] {cause}"
        if self.record_id is not None and str(self.record_id) not in str(cause):
            detail += f" (record {self.record_id})"
        super().__init__(detail)
