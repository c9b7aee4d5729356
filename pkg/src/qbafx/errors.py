"""Exception hierarchy shared across the package."""

from __future__ import annotations


class QbafError(Exception):
    """Base class for every error raised by qbafx."""


class QbafSyntaxError(QbafError, ValueError):
    """The QBAF document is not well-formed JSON."""


class SchemaError(QbafError, ValueError):
    """The document parses but violates the QBAF schema or invariants."""


class NonConvergence(QbafError):
    """Fixed-point iteration exhausted its budget.

    The last iterate is kept on ``strengths`` so callers can inspect it.
    """

    def __init__(self, message: str, strengths=None):
        super().__init__(message)
        self.strengths = strengths


class SolverError(QbafError):
    """Base for counterfactual search failures; ``result`` holds the best-so-far."""

    def __init__(self, message: str, result=None):
        super().__init__(message)
        self.result = result


class Unreachable(SolverError):
    """A sweep could not move any base score and the target is still unmet."""


class SweepLimit(SolverError):
    """The solver hit ``max_sweeps`` before reaching a valid counterfactual."""


class TooLarge(QbafError, ValueError):
    """Exact Shapley enumeration refused: too many arguments."""


class EmptyExperiment(QbafError, ValueError):
    """An experiment was requested with zero instances."""


class ConfigError(QbafError, ValueError):
    """Benchmark configuration does not match the expected schema."""
