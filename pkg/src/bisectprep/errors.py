"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation accepts."""


class IntegrationError(RuntimeError):
    """A numerical integration did not reach its tolerance.

    ``error_estimate`` is the error the backend actually achieved, and
    ``context`` optionally names the region being integrated when the failure
    happened (e.g. ``(level, index)``).
    """

    def __init__(self, message, error_estimate=float("nan"), context=None):
        super().__init__(message)
        self.error_estimate = error_estimate
        self.context = context

    def with_context(self, context):
        err = IntegrationError(f"{self.args[0]} (at region {context})",
                               self.error_estimate, context)
        return err


class DegenerateInputError(ValueError):
    """Too few usable points to evaluate a quantity."""
