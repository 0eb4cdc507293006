"""Composite-Simpson quadrature with a Richardson error estimate.

The path functionals integrate smooth integrands with one removable 0/0
at the left endpoint, so plain composite Simpson on a uniform grid is
accurate and cheap.  Callers supply the endpoint value analytically when
the integrand needs a limit there.
"""

from __future__ import annotations

import numpy as np

DEFAULT_PANELS = 1 << 14


def simpson_values(values: np.ndarray, h: float) -> float:
    """Composite Simpson over uniformly spaced samples (even panel count)."""
    n = len(values) - 1
    if n < 2 or n % 2:
        raise ValueError(f"need an even panel count >= 2, got {n}")
    return (h / 3.0) * (
        values[0]
        + values[-1]
        + 4.0 * values[1:-1:2].sum()
        + 2.0 * values[2:-1:2].sum()
    )


def simpson(f, a: float, b: float, panels: int = DEFAULT_PANELS) -> tuple[float, float]:
    """Integrate f over [a, b]; returns (value, richardson_error_estimate).

    The error estimate compares against the half-resolution rule on the
    same samples, scaled by the usual 1/15 Richardson factor.
    """
    if panels < 4 or panels % 4:
        raise ValueError("panels must be a multiple of 4 and >= 4")
    xs = np.linspace(a, b, panels + 1)
    vals = np.asarray([f(x) for x in xs], dtype=float)
    h = (b - a) / panels
    fine = simpson_values(vals, h)
    coarse = simpson_values(vals[::2], 2.0 * h)
    return fine, abs(fine - coarse) / 15.0


def cumulative_simpson(values: np.ndarray, h: float) -> np.ndarray:
    """Cumulative integral at every second sample (the pair boundaries).

    Input has 2k+1 uniform samples; output has k+1 entries, entry j being
    the Simpson integral over the first j pairs of panels.
    """
    n = len(values) - 1
    if n < 2 or n % 2:
        raise ValueError(f"need an even panel count >= 2, got {n}")
    pair = (h / 3.0) * (values[:-2:2] + 4.0 * values[1:-1:2] + values[2::2])
    out = np.empty(n // 2 + 1)
    out[0] = 0.0
    np.cumsum(pair, out=out[1:])
    return out
