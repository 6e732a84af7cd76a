"""Exception hierarchy for the solver.

Errors that signal "the time step was too large" derive from StepTooLarge so
the driver can catch them and cut the step; everything else is fatal for the
current run.
"""


class PoromechanicsError(Exception):
    """Base class for all solver errors."""


class ConfigurationError(PoromechanicsError):
    """Invalid scene/run configuration (maps to CLI exit code 2)."""


class InvalidStateError(PoromechanicsError):
    """A state variable violated a physical invariant (non-positive volume etc.)."""


class StepTooLarge(PoromechanicsError):
    """Recoverable per-step failure; the driver halves dt and retries."""


class SingularKinematicsError(StepTooLarge):
    """Non-SPD left Cauchy-Green tensor or det F <= 0 at a particle."""

    def __init__(self, message, particle=None):
        super().__init__(message)
        self.particle = particle


class ElementInversionError(StepTooLarge):
    """det(dF) <= 0: the incremental motion inverted a particle neighborhood."""

    def __init__(self, message, particle=None):
        super().__init__(message)
        self.particle = particle


class PorosityRangeError(StepTooLarge):
    """Porosity left (0, 1): excessive compaction or dilation."""


class OutOfDomainError(PoromechanicsError):
    """A particle center left the background grid."""

    def __init__(self, message, particle=None, step=None):
        super().__init__(message)
        self.particle = particle
        self.step = step


class UnsupportedDomainError(PoromechanicsError):
    """GIMP influence half-width exceeds h/2 (stencil assumption violated)."""


class SolverFailure(PoromechanicsError):
    """Newton or linear solve failed beyond recovery (CLI exit code 3)."""


class MetricError(PoromechanicsError):
    """Diagnostic metric could not be evaluated (too few samples)."""
