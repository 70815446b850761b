"""Error types shared across the package.

The split mirrors how callers are expected to react: DomainError means the
request itself is invalid (bad parameters, impossible conditioning event),
ResourceError means the request is valid but exceeded an explicit budget and
carries enough context to retry with a larger one.
"""


class DomainError(ValueError):
    """The requested object does not exist (bad argument, impossible event)."""


class UnsupportedLawError(DomainError):
    """The operation is not defined for this offspring law."""


class ResourceError(RuntimeError):
    """A computation hit an explicit budget before finishing."""

    def __init__(self, message, **info):
        super().__init__(message)
        self.info = dict(info)


class RejectionBudgetError(ResourceError):
    """Rejection sampler ran out of attempts; carries the acceptance report."""

    def __init__(self, message, attempts, accepted):
        rate = accepted / attempts if attempts else 0.0
        super().__init__(message, attempts=attempts, accepted=accepted,
                         acceptance_rate=rate)
        self.attempts = attempts
        self.accepted = accepted
        self.acceptance_rate = rate


class VertexBudgetError(ResourceError):
    """Tree generation exceeded the vertex budget (heavy tails make this an
    expected outcome, not a bug)."""

    def __init__(self, message, budget, drawn):
        super().__init__(message, budget=budget, drawn=drawn)
        self.budget = budget
        self.drawn = drawn


class NumericsError(RuntimeError):
    """Quadrature or root finding failed to converge; carries the residual."""

    def __init__(self, message, **info):
        super().__init__(message)
        self.info = dict(info)


class InsufficientDataError(ValueError):
    """Not enough usable cells/records for the requested estimate."""
