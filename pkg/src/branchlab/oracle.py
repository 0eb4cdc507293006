"""Single-particle expectation oracles for the branching expectations.

The many-to-one identity converts the expected sum of f over all live
particles into one weighted single-particle expectation,

    E^{x,y} sum_u f(X_u(t), Y_u(t))
        = E_{theta/2,0}^{x,y} [ exp(Integral_0^t R(eta_s) ds) f(xi_t, eta_t) ],

where eta is the mean-reverting type motion at rate theta/2 and
xi = B(Integral A(eta)) is a time-changed Brownian motion.  A further
change of measure removes the exponential weight: under the rate-mu(lam)
mean-reverting law with spatial drift lam,

    E^{x,y} sum_u f = e^{lam x + psi-(lam) y^2}
        * E_{mu(lam),lam}^{x,y} [ e^{-lam xi_t - psi-(lam) eta_t^2 + E-(lam) t} f ].

Both are implemented as Monte Carlo estimators with exact OU transitions;
the only discretization is the trapezoid rate integral in the first form,
matched in order to the branching simulator's step bias so comparisons
between the two routes are fair.  With f = 1 and lam = 0 the second form
has a Gaussian closed form, `expected_population`.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import rng as rngmod
from .analytics import LambdaOutOfRange, mu_lambda, psi_minus, e_minus
from .mc import EstimatorResult, from_samples
from .params import ModelParams

#: Empirical weight max/mean ratio beyond which results are flagged.
HEAVY_WEIGHT_RATIO = 1e4


class UnboundedWeight(RuntimeError):
    pass


def _simulate_single(p: ModelParams, mu: float, lam_drift: float,
                     start: tuple[float, float], t: float,
                     draws: rngmod.BlockDraws, h_max: float, c_step: float,
                     want_rate_integral: bool) -> tuple[float, float, float]:
    """One path of (xi, eta) under the rate-mu mean-reverting law.

    Returns (xi_t, eta_t, trapezoid Integral R(eta) ds).  The step honors
    the same adaptive budget h <= c_step/R(eta) as the tree simulator.
    """
    x, y = start
    rho, r, a, theta = p.rho, p.r, p.a, p.theta
    rate_int = 0.0
    s = 0.0
    exp, sqrt = math.exp, math.sqrt
    var_scale = theta / (2.0 * mu)
    while s < t - 1e-15:
        rate0 = rho + r * y * y
        h = h_max if rate0 <= 0.0 else min(h_max, c_step / rate0)
        h = min(h, t - s)
        em = exp(-mu * h)
        y2 = y * em + sqrt(var_scale * (1.0 - em * em)) * draws.normal()
        var = 0.5 * a * h * (y * y + y2 * y2)
        x2 = x + lam_drift * var
        if var > 0.0:
            x2 += sqrt(var) * draws.normal()
        if want_rate_integral:
            rate_int += 0.5 * h * (rate0 + rho + r * y2 * y2)
        x, y = x2, y2
        s += h
    return x, y, rate_int


def many_to_one_expectation(p: ModelParams, f: Callable[[float, float], float],
                            t: float, start: tuple[float, float],
                            replicas: int, seed: int,
                            h_max: float = 0.05, c_step: float = 0.02,
                            f_bound: float = 1.0) -> EstimatorResult:
    """E sum_u f(X_u, Y_u) via the weighted single-particle identity.

    `f_bound` declares a bound on |f| (variance control only; not
    enforced pointwise).  Flags the result when the empirical weight tail
    is heavy (max/mean > 1e4).
    """
    mu0 = 0.5 * p.theta  # original-law reversion rate
    vals = np.empty(replicas)
    wmax = 0.0
    wsum = 0.0
    for rep in range(replicas):
        draws = rngmod.BlockDraws(rngmod.stream(seed, rep))
        xi, eta, rint = _simulate_single(p, mu0, 0.0, start, t, draws,
                                         h_max, c_step, True)
        w = math.exp(rint)
        wmax = max(wmax, w)
        wsum += w
        vals[rep] = w * f(xi, eta)
    flags = []
    if replicas > 0 and wmax / (wsum / replicas) > HEAVY_WEIGHT_RATIO:
        flags.append("heavy_weight_tail")
    return from_samples(vals, seed=seed, flags=tuple(flags))


def transformed_expectation(p: ModelParams, lam: float,
                            f: Callable[[float, float], float], t: float,
                            start: tuple[float, float], replicas: int, seed: int,
                            h_max: float = 0.05, c_step: float = 0.02) -> EstimatorResult:
    """E sum_u f(X_u, Y_u) via the drift-changed, weight-free form.

    Samples (xi, eta) under the rate-mu(lam) mean-reverting law with
    spatial drift lam and averages
    e^{lam x0 + psi- y0^2} e^{-lam xi - psi- eta^2 + E- t} f(xi, eta).
    """
    if not (p.lambda_min < lam < 0.0):
        raise LambdaOutOfRange(f"lam must be in (lambda_min, 0), got {lam}")
    mu = mu_lambda(p, lam)
    pm = psi_minus(p, lam)
    em = e_minus(p, lam)
    x0, y0 = start
    log_prefactor = lam * x0 + pm * y0 * y0
    vals = np.empty(replicas)
    wmax = 0.0
    wsum = 0.0
    for rep in range(replicas):
        draws = rngmod.BlockDraws(rngmod.stream(seed, rep))
        xi, eta, _ = _simulate_single(p, mu, lam, start, t, draws,
                                      h_max, c_step, False)
        w = math.exp(log_prefactor - lam * xi - pm * eta * eta + em * t)
        wmax = max(wmax, w)
        wsum += w
        vals[rep] = w * f(xi, eta)
    flags = []
    if replicas > 0 and wmax / (wsum / replicas) > HEAVY_WEIGHT_RATIO:
        flags.append("heavy_weight_tail")
    return from_samples(vals, seed=seed, flags=tuple(flags))


def expected_population(p: ModelParams, t: float, start_y: float = 0.0) -> float:
    """Closed-form E|N_t| for a particle started at type start_y.

    From the weight-free identity with f = 1 at lam = 0: with
    m = start_y e^{-mu_0 t} and s2 = theta(1 - e^{-2 mu_0 t})/(2 mu_0),

        E|N_t| = e^{psi-_0 start_y^2 + E-_0 t}
                 * (1 + 2 psi-_0 s2)^{-1/2} * exp(-psi-_0 m^2/(1 + 2 psi-_0 s2)).

    Reduces to e^{rho t} when r = 0 and to 1 as t -> 0.
    """
    if t < 0.0:
        raise ValueError(f"t must be >= 0, got {t}")
    if t == 0.0:
        return 1.0
    mu0 = mu_lambda(p, 0.0)
    pm = psi_minus(p, 0.0)
    em = e_minus(p, 0.0)
    m = start_y * math.exp(-mu0 * t)
    s2 = p.theta * (1.0 - math.exp(-2.0 * mu0 * t)) / (2.0 * mu0)
    denom = 1.0 + 2.0 * pm * s2
    return math.exp(pm * start_y * start_y + em * t) / math.sqrt(denom) * math.exp(
        -pm * m * m / denom
    )


def ou_transition(p: ModelParams, mu: float, y: float, h: float) -> tuple[float, float]:
    """Mean and variance of the rate-mu mean-reverting OU over a step h."""
    em = math.exp(-mu * h)
    return y * em, p.theta * (1.0 - em * em) / (2.0 * mu)
