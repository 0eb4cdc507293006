"""Common Monte Carlo return shape and summary helpers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class EstimatorResult:
    """Point estimate with its standard error and provenance."""

    estimate: float
    std_error: float
    replicas: int
    seed: int
    discarded: int = 0
    flags: tuple[str, ...] = field(default_factory=tuple)

    def interval(self, k: float = 3.0) -> tuple[float, float]:
        return self.estimate - k * self.std_error, self.estimate + k * self.std_error

    def overlaps(self, other: "EstimatorResult", k: float = 3.0) -> bool:
        a_lo, a_hi = self.interval(k)
        b_lo, b_hi = other.interval(k)
        return a_lo <= b_hi and b_lo <= a_hi

    def covers(self, value: float, k: float = 3.0) -> bool:
        lo, hi = self.interval(k)
        return lo <= value <= hi


def from_samples(samples, seed: int, discarded: int = 0,
                 flags: tuple[str, ...] = ()) -> EstimatorResult:
    """Mean and standard error of the mean from raw replica values."""
    arr = np.asarray(samples, dtype=float)
    n = arr.size
    if n == 0:
        raise ValueError("no samples")
    mean = float(arr.mean())
    se = float(arr.std(ddof=1) / math.sqrt(n)) if n > 1 else float("nan")
    return EstimatorResult(estimate=mean, std_error=se, replicas=n,
                           seed=seed, discarded=discarded, flags=tuple(flags))
