"""Exception types shared across the package."""

from __future__ import annotations


class DimensionError(ValueError):
    """Vector operands have incompatible lengths."""


class ConfigError(ValueError):
    """An experiment or schedule description is malformed."""


class EvaluationError(ArithmeticError):
    """An objective produced a non-finite value where a finite one is required."""


class DivergenceError(EvaluationError):
    """A training run produced a non-finite loss or gradient.

    Carries the step index at which the run blew up and the trace of the
    steps completed before it, so accounting stays auditable even for
    aborted runs.
    """

    def __init__(self, message: str, step: int, trace=None):
        super().__init__(message)
        self.step = step
        self.trace = list(trace) if trace is not None else []
