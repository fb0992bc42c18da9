"""Exception types shared across the package."""

from __future__ import annotations

__all__ = [
    "ScnoscError",
    "NotOscillatingError",
    "ScenarioError",
    "SolverError",
    "StepSizeError",
    "NonFiniteStateError",
    "AnalysisError",
    "InsufficientEventsError",
    "MissingInjectionError",
    "UnsynchronizedPairError",
    "SweepError",
]


class ScnoscError(Exception):
    """Base class for all package-specific failures."""


class NotOscillatingError(ScnoscError):
    """Raised when a parameter set cannot sustain free-running oscillation."""


class ScenarioError(ScnoscError):
    """Scenario text rejected; carries a 1-based line number when one applies."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SolverError(ScnoscError):
    """Integration could not be carried out."""


class StepSizeError(SolverError):
    """Requested step size violates the stability/resolution precondition."""


class NonFiniteStateError(SolverError):
    """State vector left the finite floats; reports the first bad time."""

    def __init__(self, t: float):
        self.t = t
        super().__init__(f"non-finite state encountered at t={t:.6e} s")


class AnalysisError(ScnoscError):
    """Trace post-processing failed."""


class InsufficientEventsError(AnalysisError):
    """Too few switching events for the requested statistic."""


class MissingInjectionError(AnalysisError):
    """Lock analysis needs a trace produced with an injection reference."""


class UnsynchronizedPairError(AnalysisError):
    """Coupled pair did not settle onto a common period."""


class SweepError(ScnoscError):
    """Sweep specification invalid (bad parameter path, bad grid, bad metric)."""
