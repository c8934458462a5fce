"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """An argument violates a documented precondition."""


class DegenerateInputError(ValueError):
    """Input carries too little signal for a meaningful estimate."""


class ConsistencyError(RuntimeError):
    """Internal data disagree with each other (e.g. a PRS cell is zero)."""


class WindowRangeError(IndexError):
    """A requested sample window falls outside the signal."""


class StageError(RuntimeError):
    """Wraps a failure inside the TOA pipeline with the failing stage name."""

    def __init__(self, stage, cause):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause
