"""Model parameters for the typed branching diffusion.

A particle carries a spatial position x and a type y.  The type follows a
mean-reverting Ornstein-Uhlenbeck motion with generator
(theta/2)(d^2/dy^2 - y d/dy), whose invariant law is standard normal.  A
particle of type y diffuses in space as a driftless Brownian motion with
variance coefficient A(y) = a*y^2 and splits into two offspring at rate
R(y) = r*y^2 + rho.

Only the high-temperature regime theta > 8*r is supported: there the
mean-reversion of the type dominates the quadratic breeding and the
expected population stays finite.  The spatial coefficient a must be
strictly positive because every closed-form rate below divides by it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class ParamError(ValueError):
    """A model-parameter constraint is violated."""


class NonPositiveTheta(ParamError):
    pass


class LowTemperature(ParamError):
    """theta <= 8*r: outside the supported high-temperature regime."""


class NonPositiveA(ParamError):
    pass


class NegativeRate(ParamError):
    pass


@dataclass(frozen=True)
class ModelParams:
    """The four model constants (theta, a, r, rho), validated on creation."""

    theta: float
    a: float
    r: float
    rho: float

    def __post_init__(self):
        if not (self.theta > 0.0) or not math.isfinite(self.theta):
            raise NonPositiveTheta(f"theta must be > 0, got {self.theta}")
        if not (self.a > 0.0) or not math.isfinite(self.a):
            raise NonPositiveA(f"a must be > 0, got {self.a}")
        if self.r < 0.0 or not math.isfinite(self.r):
            raise NegativeRate(f"r must be >= 0, got {self.r}")
        if self.rho < 0.0 or not math.isfinite(self.rho):
            raise NegativeRate(f"rho must be >= 0, got {self.rho}")
        if self.theta <= 8.0 * self.r:
            raise LowTemperature(
                f"need theta > 8*r (high temperature), got theta={self.theta}, 8r={8.0 * self.r}"
            )

    @property
    def lambda_min(self) -> float:
        """Left endpoint of the admissible wave-parameter range.

        Below this value the oscillator rate mu_lambda turns complex.
        """
        return -math.sqrt((self.theta - 8.0 * self.r) / (4.0 * self.a))

    def branch_rate(self, y: float) -> float:
        """Binary splitting rate R(y) = r*y^2 + rho."""
        return self.r * y * y + self.rho

    def spatial_variance(self, y: float) -> float:
        """Spatial diffusion coefficient A(y) = a*y^2."""
        return self.a * y * y


def validate_params(theta: float, a: float, r: float, rho: float) -> ModelParams:
    """Validate the four raw constants and return a ModelParams.

    Raises NonPositiveTheta, NonPositiveA, NegativeRate or LowTemperature
    naming the violated constraint.
    """
    return ModelParams(float(theta), float(a), float(r), float(rho))
