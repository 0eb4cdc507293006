"""Additive martingales evaluated on population snapshots.

For lam in (lambda_min, 0] the two families are

    Z+-(t) = sum_u exp(psi+-(lam) Y_u^2 + lam X_u - E+-(lam) t),

kept in the log domain throughout (psi+ y^2 can overflow the float range
for rare high-type particles).  The minus family converges to a strictly
positive limit right of lambda_tilde and to zero left of it; the plus
family always dies, with exponential rate lam*(c+ - c*) where c* switches
from c-(lam) to the extremal speed c_tilde at lambda_tilde.  The
`f0_constant` integral is the limit constant of eigenfunction-weighted
particle sums against the minus martingale limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import logsumexp

from .analytics import (
    DomainError,
    LambdaOutOfRange,
    gamma_lambda,
    mu_lambda,
    psi_minus,
    psi_plus,
    e_minus,
    e_plus,
    spectral,
    wave_speed,
)
from .mc import EstimatorResult
from .params import ModelParams
from .simulator import PopulationSnapshot


class EmptySnapshot(ValueError):
    pass


class InsufficientData(ValueError):
    pass


class AlphaOutOfRange(ValueError):
    """alpha >= 1/4: the limit-constant integral diverges."""


@dataclass
class MartingaleSeries:
    """log Z(t) samples along one run, for one (lam, sign)."""

    lam: float
    sign: str
    samples: list[tuple[float, float]]  # (time, log_value)
    normalized: bool = False  # divided by Z(0)


def log_z_terms(snap: PopulationSnapshot, p: ModelParams, lam: float,
                sign: str) -> np.ndarray:
    """Per-particle log terms psi Y^2 + lam X - E t."""
    if sign == "plus":
        psi, e = psi_plus(p, lam), e_plus(p, lam)
    elif sign == "minus":
        psi, e = psi_minus(p, lam), e_minus(p, lam)
    else:
        raise DomainError(f"sign must be 'plus' or 'minus', got {sign!r}")
    return psi * snap.ys**2 + lam * snap.xs - e * snap.time


def z_value(snap: PopulationSnapshot, p: ModelParams, lam: float,
            sign: str) -> float:
    """log Z+-(t) on the snapshot, via a stable log-sum-exp."""
    if lam > 0.0 or lam <= p.lambda_min:
        raise LambdaOutOfRange(f"lam must be in (lambda_min, 0], got {lam}")
    if len(snap) == 0:
        raise EmptySnapshot(f"no particles at t={snap.time}")
    return float(logsumexp(log_z_terms(snap, p, lam, sign)))


def log_z_initial(p: ModelParams, lam: float, sign: str,
                  start: tuple[float, float]) -> float:
    """log Z+-(0) for a single starting particle."""
    x, y = start
    psi = psi_plus(p, lam) if sign == "plus" else psi_minus(p, lam)
    return psi * y * y + lam * x


def series_from_snapshots(snaps, p: ModelParams, lam: float, sign: str,
                          normalize_start: tuple[float, float] | None = None) -> MartingaleSeries:
    z0 = (log_z_initial(p, lam, sign, normalize_start)
          if normalize_start is not None else 0.0)
    samples = [(s.time, z_value(s, p, lam, sign) - z0) for s in snaps]
    return MartingaleSeries(lam=lam, sign=sign, samples=samples,
                            normalized=normalize_start is not None)


def decay_slope(series: MartingaleSeries,
                fit_window: tuple[float, float] | None = None) -> float:
    """Least-squares slope of log Z against time inside the window."""
    pts = series.samples
    if fit_window is not None:
        lo, hi = fit_window
        pts = [(t, v) for t, v in pts if lo <= t <= hi]
    if len(pts) < 3:
        raise InsufficientData(f"need >= 3 samples in window, got {len(pts)}")
    ts = np.asarray([t for t, _ in pts])
    vs = np.asarray([v for _, v in pts])
    slope, _ = np.polyfit(ts, vs, 1)
    return float(slope)


def f0_constant(p: ModelParams, f, alpha: float, lam: float,
                tail_sigmas: float = 14.0) -> float:
    """Limit constant (mu/theta)^{1/4} Integral f(y) e^{(alpha+psi-) y^2} phi(y) dy.

    Integrable for alpha < 1/4 since alpha + psi- < 1/2; the quadrature
    runs over +-tail_sigmas standard deviations of the effective Gaussian.
    """
    if alpha >= 0.25:
        raise AlphaOutOfRange(f"alpha must be < 1/4, got {alpha}")
    mu = mu_lambda(p, lam)
    pm = psi_minus(p, lam)
    c = alpha + pm
    eff_sd = 1.0 / math.sqrt(1.0 - 2.0 * c)
    lim = tail_sigmas * eff_sd

    def integrand(y):
        return f(y) * math.exp(c * y * y - 0.5 * y * y) / math.sqrt(2.0 * math.pi)

    val, _ = integrate.quad(integrand, -lim, lim, limit=200)
    return (mu / p.theta) ** 0.25 * float(val)


def weighted_ratio(snap: PopulationSnapshot, p: ModelParams, f, alpha: float,
                   lam: float, localize_window: float | None = None) -> float:
    """One-snapshot ratio sum_u f(Y_u) e^{alpha Y_u^2 + lam(X_u + c- t)} / Z-(t).

    With `localize_window` = w, the numerator keeps only particles with
    |X_u/t + gamma(lam)| < w (the carriers of the limit).
    """
    if len(snap) == 0:
        raise EmptySnapshot(f"no particles at t={snap.time}")
    s = spectral(p, lam)
    t = snap.time
    fy = np.asarray([f(float(y)) for y in snap.ys], dtype=float)
    if np.any(fy < 0.0):
        raise DomainError("ratio check requires f >= 0")
    # lam * c-(lam) = -E-(lam), so the time normalization matches Z-.
    logs = alpha * snap.ys**2 + lam * snap.xs - s.e_minus * t
    if localize_window is not None:
        g = gamma_lambda(p, lam)
        keep = np.abs(snap.xs / t + g) < localize_window
        fy = fy * keep
    if not np.any(fy > 0.0):
        num = -math.inf
    else:
        num = float(logsumexp(logs, b=fy))
    den = z_value(snap, p, lam, "minus")
    return math.exp(num - den)


def ratio_limit_check(runs, p: ModelParams, f, alpha: float, lam: float,
                      seed: int = 0,
                      localize_window: float | None = None) -> EstimatorResult:
    """Replica spread of the weighted ratio at each run's last usable snapshot.

    `runs` is an iterable of snapshot lists; truncated snapshots are
    skipped (latest non-truncated one is used).  The theoretical limit of
    the ratio is f0_constant(p, f, alpha, lam).
    """
    if alpha >= 0.25:
        raise AlphaOutOfRange(f"alpha must be < 1/4, got {alpha}")
    _, lam_tilde = wave_speed(p)
    if not (lam_tilde < lam <= 0.0) or lam <= p.lambda_min:
        raise LambdaOutOfRange(
            f"ratio limit needs lam in (lambda_tilde, 0], got {lam}"
        )
    vals = []
    discarded = 0
    for snaps in runs:
        usable = [s for s in snaps if not s.truncated and len(s) > 0]
        if not usable:
            discarded += 1
            continue
        snap = usable[-1]
        vals.append(weighted_ratio(snap, p, f, alpha, lam,
                                   localize_window=localize_window))
    if not vals:
        raise InsufficientData("no non-truncated replicas")
    arr = np.asarray(vals)
    med = float(np.median(arr))
    # spread of the median via the quartile range; reported as std_error
    q1, q3 = np.percentile(arr, [25.0, 75.0])
    se = float((q3 - q1) / (2.0 * math.sqrt(len(arr))))
    return EstimatorResult(estimate=med, std_error=se, replicas=len(arr),
                           seed=seed, discarded=discarded)
