"""Named test functions usable across the CLI/service boundary.

Estimator endpoints take functions by name so that requests stay plain
data.  Every entry maps (x, y) into a bounded range; the product-form
estimator additionally requires values in [0, 1].
"""

from __future__ import annotations

import math
from typing import Callable

XYFunc = Callable[[float, float], float]


def make_xy_function(spec: str) -> XYFunc:
    """Resolve a function spec.

    Supported:
      'one'                     constant 1
      'const:c'                 constant c
      'indicator_y:lo,hi'       1 when y in [lo, hi]
      'indicator_y_ge:level'    1 when y >= level
      'gauss_xy'                exp(-x^2 - y^2)
    """
    if spec == "one":
        return lambda x, y: 1.0
    if spec == "gauss_xy":
        return lambda x, y: math.exp(-x * x - y * y)
    if spec.startswith("const:"):
        c = float(spec.split(":", 1)[1])
        return lambda x, y: c
    if spec.startswith("indicator_y:"):
        lo, hi = (float(v) for v in spec.split(":", 1)[1].split(","))
        return lambda x, y: 1.0 if lo <= y <= hi else 0.0
    if spec.startswith("indicator_y_ge:"):
        level = float(spec.split(":", 1)[1])
        return lambda x, y: 1.0 if y >= level else 0.0
    raise ValueError(f"unknown function spec {spec!r}")


def make_y_function(spec: str) -> Callable[[float], float]:
    """Same registry restricted to y-only functions."""
    f = make_xy_function(spec)
    return lambda y: f(0.0, y)
