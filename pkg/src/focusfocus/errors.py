class ValidationError(ValueError):
    """Inputs violate a documented precondition (CLI exit code 2)."""


class NumericFailure(RuntimeError):
    """A numerical procedure failed to deliver a trustworthy result (CLI exit code 3)."""
