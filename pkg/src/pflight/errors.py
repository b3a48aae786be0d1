"""Exception types shared across the package.

Validation problems (bad parameters, points outside the support of a
density, observation files inconsistent with the claimed motion) raise
subclasses of ``ValueError`` so callers can treat them uniformly.
Numerical failures raise ``NumericalError`` and carry the best estimate
that was achieved, so a caller can still inspect it.
"""

from __future__ import annotations


class ParameterError(ValueError):
    """A parameter violates its documented constraint (e.g. rate <= 0)."""


class DomainError(ValueError):
    """An evaluation point lies outside the support of the quantity asked for."""


class InconsistentSampleError(ValueError):
    """Observed positions are impossible under the claimed speed and spacing.

    Raised when a squared slack c^2 dt^2 - |increment|^2 is negative beyond
    the classification tolerance, i.e. some increment is longer than the
    distance the mover can cover in one step.
    """


class NumericalError(ArithmeticError):
    """A numerical routine could not reach its target accuracy."""

    def __init__(self, message: str, estimate: float | None = None,
                 error_bound: float | None = None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class QuadratureError(NumericalError):
    """Adaptive quadrature failed; ``estimate`` holds the best value reached."""


class EmptyCellError(NumericalError):
    """A Monte Carlo cell finished with zero successful replications."""


class BesselOverflowError(NumericalError):
    """exp(x) * scaled value would overflow; ``scaled_value`` is exp(-x) * I_nu(x)."""

    def __init__(self, message: str, scaled_value: float):
        super().__init__(message, estimate=scaled_value)
        self.scaled_value = scaled_value
