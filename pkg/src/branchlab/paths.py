"""Optimal ascent paths, the finite-horizon optimizer, and path costs.

The rapid-ascent calculus fixes endpoints y(0)=0, y(tau)=kappa*sqrt(t) in
type and x(0)=0, x(tau)=-beta*t in space over a short window [0, tau].
The extremal pair for wave parameter lam with oscillator rate mu = mu(lam)
is the sinh family

    y(s) = kappa*sqrt(t) * sinh(mu s)/sinh(mu tau)
    x(s) = -beta*t * (sinh 2mu s - 2mu s)/(sinh 2mu tau - 2mu tau)

and x also equals lam*a*Integral(y^2) exactly when lam solves the
finite-horizon optimality condition

    -beta*t/(a*lam) = kappa^2 t (coth(mu tau)/(2 mu) - tau/(2 sinh^2(mu tau)))
                    = Integral_0^tau y(s)^2 ds.

That root, lambda_hat(tau), exists in (lambda_min, 0) only when tau is
large enough (the right side is bounded by kappa^2 t tau/3, so short
horizons cannot supply the required spatial displacement); `lambda_hat`
reports NoBracket rather than fabricating a value.  As tau grows,
lambda_hat decreases in magnitude toward the infinite-horizon optimizer
lambda_bar_ascent(beta, kappa).

The running cost of a pinned pair (x, y) is

    J(x, y, s) = Integral_0^s [ (ydot + theta y/2)^2/(2 theta)
                                + xdot^2/(2 a y^2) - r y^2 - rho ] dw,

with L(x, y, tau) = sup_{s <= tau} J(x, y, s).  Along the optimal pair at
lam = lambda_hat the endpoint value admits the closed form

    J(tau) = t*(kappa^2 (1/4 + (mu/(2 theta)) coth(mu tau)) - lam*beta) - rho*tau

and the sup is attained at the endpoint.  The integrand's 0/0 at s=0 is
removable (y ~ s, xdot ~ s^2) and handled by its analytic limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import quadrature
from .analytics import lambda_bar_ascent, mu_lambda
from .params import ModelParams


class DegenerateTau(ValueError):
    """tau <= 0: no ascent window."""


class NoBracket(RuntimeError):
    """The finite-horizon optimality equation has no sign change on the
    admissible lam range; no root is fabricated."""


class SingularPath(ValueError):
    """y vanishes on the interior with nonzero xdot: cost integrand blows up."""


#: Sign-scan resolution and bisection tolerance for lambda_hat.
ROOT_SCAN_POINTS = 256
ROOT_XTOL = 1e-12
#: Finite-difference step factor for user-supplied paths without derivatives.
FD_STEP_FACTOR = 1e-6
#: Grid for the sup mode of the cost functional.
SUP_GRID_POINTS = 1024


@dataclass(frozen=True)
class AscentSpec:
    """Targets of the ascent: final position near (-beta*t, kappa*sqrt(t))."""

    beta: float
    kappa: float
    t: float

    def __post_init__(self):
        if self.beta < 0.0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if self.kappa <= 0.0:
            raise ValueError(f"kappa must be > 0, got {self.kappa}")
        if self.t <= 0.0:
            raise ValueError(f"t must be > 0, got {self.t}")


class PathSampler:
    """Callable mapping s to (value, derivative)."""

    def __init__(self, fn: Callable[[float], tuple[float, float]]):
        self._fn = fn

    def __call__(self, s: float) -> tuple[float, float]:
        return self._fn(s)

    def value(self, s: float) -> float:
        return self._fn(s)[0]


def sampler_from_function(f: Callable[[float], float], tau: float) -> PathSampler:
    """Wrap a plain value function; derivatives by central differences."""
    h = FD_STEP_FACTOR * tau

    def fn(s):
        lo, hi = max(0.0, s - h), min(tau, s + h)
        return f(s), (f(hi) - f(lo)) / (hi - lo)

    return PathSampler(fn)


@dataclass(frozen=True)
class OptimalAscent:
    """Sinh-family ascent paths pinned to the (beta, kappa, t) endpoints."""

    tau: float
    lambda_used: float
    spec: AscentSpec
    y_path: PathSampler
    x_path: PathSampler
    cost: float


@dataclass(frozen=True)
class PathFunctionalValue:
    j_value: float
    l_value: float
    quadrature_error_estimate: float


def tau_of_t(p: ModelParams, lambda_bar: float, t: float) -> float:
    """Ascent-window clock tau(t) = log(2 mu t/theta)/(2 mu), floored at 0.

    With this choice sqrt(theta/(2 mu)) e^{mu tau} = sqrt(t): the window is
    exactly long enough for the biased type motion to reach height sqrt(t)
    from its stationary scale.
    """
    mu = mu_lambda(p, lambda_bar)
    arg = 2.0 * mu * t / p.theta
    if arg <= 1.0:
        return 0.0
    return math.log(arg) / (2.0 * mu)


def integral_y_squared(p: ModelParams, lam: float, tau: float, kappa: float, t: float) -> float:
    """Closed form of Integral_0^tau y(s)^2 ds along the sinh path."""
    mu = mu_lambda(p, lam)
    x = mu * tau
    return kappa * kappa * t * (
        1.0 / (math.tanh(x) * 2.0 * mu) - tau / (2.0 * math.sinh(x) ** 2)
    )


def optimal_paths(p: ModelParams, spec: AscentSpec, lam: float, tau: float) -> OptimalAscent:
    """The pinned extremal pair (x, y) for wave parameter lam on [0, tau].

    Endpoints hold exactly by construction.  The identity
    x(s) = lam*a*Integral_0^s y^2 additionally holds when lam solves the
    finite-horizon optimality condition (see lambda_hat).
    """
    if tau <= 0.0:
        raise DegenerateTau(f"tau must be > 0, got {tau}")
    mu = mu_lambda(p, lam)
    kst = spec.kappa * math.sqrt(spec.t)
    bt = spec.beta * spec.t
    sh_t = math.sinh(mu * tau)
    denom_x = math.sinh(2.0 * mu * tau) - 2.0 * mu * tau

    def y_fn(s):
        v = kst * math.sinh(mu * s) / sh_t
        dv = kst * mu * math.cosh(mu * s) / sh_t
        return v, dv

    def x_fn(s):
        v = -bt * (math.sinh(2.0 * mu * s) - 2.0 * mu * s) / denom_x
        dv = -bt * 2.0 * mu * (math.cosh(2.0 * mu * s) - 1.0) / denom_x
        return v, dv

    y_path = PathSampler(y_fn)
    x_path = PathSampler(x_fn)
    cost = ascent_cost_value(p, spec.beta, spec.kappa, lam, tau)
    return OptimalAscent(tau=tau, lambda_used=lam, spec=spec,
                         y_path=y_path, x_path=x_path, cost=cost)


def _lambda_hat_objective(p: ModelParams, beta: float, kappa: float, tau: float):
    k2 = kappa * kappa

    def f(lam):
        mu = mu_lambda(p, lam)
        x = mu * tau
        rhs = k2 * (1.0 / (math.tanh(x) * 2.0 * mu) - tau / (2.0 * math.sinh(x) ** 2))
        return -beta / (p.a * lam) - rhs

    return f


def lambda_hat(p: ModelParams, spec: AscentSpec, tau: float,
               eps: float = 1e-9) -> float:
    """Root of the finite-horizon optimality condition, by bisection.

    Scans ROOT_SCAN_POINTS points of (lambda_min+eps, -eps) for a sign
    change, then bisects to ROOT_XTOL.  Raises NoBracket when no sign
    change exists (short horizons; the displacement -beta*t is then
    unreachable along any admissible path family).
    """
    if tau <= 0.0:
        raise DegenerateTau(f"tau must be > 0, got {tau}")
    if spec.beta <= 0.0 or spec.kappa <= 0.0:
        raise ValueError("lambda_hat requires beta > 0 and kappa > 0")
    f = _lambda_hat_objective(p, spec.beta, spec.kappa, tau)
    lo, hi = p.lambda_min + eps, -eps
    grid = np.linspace(lo, hi, ROOT_SCAN_POINTS)
    vals = [f(l) for l in grid]
    for i in range(len(grid) - 1):
        if vals[i] == 0.0:
            return float(grid[i])
        if (vals[i] < 0.0) != (vals[i + 1] < 0.0):
            a, b = float(grid[i]), float(grid[i + 1])
            fa = vals[i]
            while b - a > ROOT_XTOL:
                m = 0.5 * (a + b)
                fm = f(m)
                if fm == 0.0:
                    return m
                if (fm < 0.0) == (fa < 0.0):
                    a, fa = m, fm
                else:
                    b = m
            return 0.5 * (a + b)
    raise NoBracket(
        f"no sign change for lambda_hat on ({lo}, {hi}) at beta={spec.beta}, "
        f"kappa={spec.kappa}, tau={tau}"
    )


def ascent_cost_value(p: ModelParams, beta: float, kappa: float,
                      lam: float, tau: float) -> float:
    """Per-t ascent cost kappa^2(1/4 + (mu/(2 theta)) coth(mu tau)) - lam*beta."""
    mu = mu_lambda(p, lam)
    return kappa * kappa * (0.25 + mu / (2.0 * p.theta) / math.tanh(mu * tau)) - lam * beta


def ascent_cost_limit(p: ModelParams, beta: float, kappa: float, tau: float) -> float:
    """Finite-horizon optimal per-t cost; decreases to Theta(beta, kappa).

    For beta = 0 the optimizer sits at lam = 0 and the cost reduces to
    kappa^2 (1/4 + (mu_0/(2 theta)) coth(mu_0 tau)).  Errors from
    lambda_hat (NoBracket on short horizons) propagate.
    """
    if tau <= 0.0:
        raise DegenerateTau(f"tau must be > 0, got {tau}")
    if beta == 0.0:
        return ascent_cost_value(p, 0.0, kappa, 0.0, tau)
    lam_hat = lambda_hat(p, AscentSpec(beta=beta, kappa=kappa, t=1.0), tau)
    return ascent_cost_value(p, beta, kappa, lam_hat, tau)


def cost_integrand(p: ModelParams, x_path: PathSampler, y_path: PathSampler):
    """Running-cost integrand with the removable s=0 limit handled.

    (ydot + theta y/2)^2/(2 theta) + xdot^2/(2 a y^2) - r y^2 - rho.
    The spatial ratio is assigned its analytic limit 0 where y = 0 with
    xdot = 0; a genuinely singular point raises SingularPath.
    """

    def g(s):
        y, dy = y_path(s)
        x, dx = x_path(s)
        drift_term = (dy + 0.5 * p.theta * y) ** 2 / (2.0 * p.theta)
        if y == 0.0:
            if abs(dx) > 0.0:
                raise SingularPath(f"y(s)=0 with xdot={dx} at s={s}")
            spatial = 0.0
        else:
            spatial = dx * dx / (2.0 * p.a * y * y)
        return drift_term + spatial - p.r * y * y - p.rho

    return g


def functional_J(p: ModelParams, x_path: PathSampler, y_path: PathSampler,
                 s: float, mode: str = "at_s", tau: float | None = None,
                 panels: int = quadrature.DEFAULT_PANELS) -> PathFunctionalValue:
    """Running cost J(x, y, s), or its sup over [0, tau] in mode='sup'.

    mode='at_s' integrates up to s by composite Simpson (>= 2^14 panels by
    default) and reports a Richardson error estimate.  mode='sup' scans a
    SUP_GRID_POINTS cumulative grid over [0, tau] and refines around the
    discrete maximum by golden-section search.
    """
    g = cost_integrand(p, x_path, y_path)
    if mode == "at_s":
        if s <= 0.0:
            return PathFunctionalValue(0.0, 0.0, 0.0)
        j, err = quadrature.simpson(g, 0.0, s, panels=panels)
        return PathFunctionalValue(j_value=j, l_value=max(j, 0.0),
                                   quadrature_error_estimate=err)
    if mode != "sup":
        raise ValueError(f"mode must be 'at_s' or 'sup', got {mode!r}")
    if tau is None:
        tau = s
    if tau <= 0.0:
        raise DegenerateTau(f"tau must be > 0, got {tau}")

    n = 2 * SUP_GRID_POINTS
    xs = np.linspace(0.0, tau, n + 1)
    vals = np.asarray([g(x) for x in xs], dtype=float)
    cum = quadrature.cumulative_simpson(vals, tau / n)  # at xs[::2]
    k = int(np.argmax(cum))
    grid_s = xs[::2]

    def j_at(sv):
        if sv <= 0.0:
            return 0.0
        jj, _ = quadrature.simpson(g, 0.0, sv, panels=1024)
        return jj

    lo = grid_s[max(k - 1, 0)]
    hi = grid_s[min(k + 1, len(grid_s) - 1)]
    l_value = float(cum[k])
    if hi > lo:
        phi = (math.sqrt(5.0) - 1.0) / 2.0
        a, b = lo, hi
        c, d = b - phi * (b - a), a + phi * (b - a)
        fc, fd = j_at(c), j_at(d)
        for _ in range(40):
            if fc > fd:
                b, d, fd = d, c, fc
                c = b - phi * (b - a)
                fc = j_at(c)
            else:
                a, c, fc = c, d, fd
                d = a + phi * (b - a)
                fd = j_at(d)
        l_value = max(l_value, fc, fd)

    j_end, err = quadrature.simpson(g, 0.0, tau, panels=panels)
    l_value = max(l_value, j_end, 0.0)
    return PathFunctionalValue(j_value=j_end, l_value=l_value,
                               quadrature_error_estimate=err)


def endpoint_cost_closed_form(p: ModelParams, spec: AscentSpec, lam: float, tau: float) -> float:
    """Closed form of J at the right endpoint along the consistent pair:
    t*(kappa^2(1/4 + (mu/(2 theta)) coth(mu tau)) - lam*beta) - rho*tau."""
    return spec.t * ascent_cost_value(p, spec.beta, spec.kappa, lam, tau) - p.rho * tau
