"""Exception hierarchy.

Model/domain errors and numerical failures are kept apart so that the
command line front end can map them onto distinct exit codes.
"""

from __future__ import annotations


class AutoresonanceError(Exception):
    """Base class for every error raised by this package."""


class ModelError(AutoresonanceError, ValueError):
    """Parameters or states outside the domain where a model is defined."""


class NumericalError(AutoresonanceError, ArithmeticError):
    """A computation broke down numerically."""


class InvalidParameter(ModelError):
    pass


class NonPositiveLambda(ModelError):
    """Chirp rate alpha <= 0, so the reduced model has no captured solutions."""


class DegeneratePumping(ModelError):
    """``|m| == m_*``: the series coefficients are undefined."""


class BranchAbsent(ModelError):
    """Requested branch does not exist for these parameters."""


class PhaseUndefined(ModelError):
    """Oscillator phase requested at the exact origin ``u = v = 0``."""


class AmplitudeSingular(NumericalError):
    """Amplitude fell below the floor where ``f cos(psi) / rho`` is evaluated."""

    def __init__(self, rho: float, rho_min: float):
        super().__init__(f"amplitude {rho!r} is below the floor {rho_min!r}")
        self.rho = rho
        self.rho_min = rho_min


class SingularRecurrence(NumericalError):
    """An order of the coefficient recurrence is (numerically) singular."""


class StepUnderflow(NumericalError):
    """Adaptive step size collapsed; carries the partial trajectory."""

    def __init__(self, message: str, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory
