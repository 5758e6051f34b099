"""Shared error types used across the package."""


class InputError(ValueError):
    """A model, objective, run or flag combination is structurally invalid."""


class RefusalError(RuntimeError):
    """The analysis refuses to run (cap exceeded, timeout, ...).

    Carries enough context for the CLI to print actionable guidance and
    exit with status 1 rather than crash.
    """

    def __init__(self, message, guidance=None):
        super().__init__(message)
        self.guidance = guidance


class PlayerCapExceeded(RefusalError):
    pass


class BlockCapExceeded(RefusalError):
    pass


class AnalysisTimeout(RefusalError):
    pass
