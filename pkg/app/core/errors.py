class PipelineError(Exception):
    """Base class for every error raised by the learning pipeline."""


class ConstructionError(PipelineError, ValueError):
    pass


class DomainMismatchError(PipelineError, ValueError):
    pass


class EmptySampleError(PipelineError, ValueError):
    pass


class PreconditionError(PipelineError, ValueError):
    pass


class ConfigError(PipelineError, ValueError):
    pass


class InvariantViolation(PipelineError, RuntimeError):
    pass


class NonRealizableError(PipelineError, ValueError):
    """Raised when a labeled sequence has no consistent hypothesis left."""

    def __init__(self, prefix_length: int, message: str | None = None):
        self.prefix_length = prefix_length
        super().__init__(
            message or f"sequence is not realizable: version space empty after {prefix_length} examples"
        )


class ResourceGuardError(PipelineError, RuntimeError):
    """An exhaustive search or enumeration would exceed its configured guard."""

    def __init__(self, guard: str, limit: int, attempted: int | float):
        self.guard = guard
        self.limit = limit
        self.attempted = attempted
        super().__init__(f"{guard} guard exceeded: limit={limit}, attempted={attempted}")
