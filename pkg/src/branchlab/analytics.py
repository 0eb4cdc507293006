"""Closed-form rates, thresholds and optimal parameters of the model.

Conventions used throughout (lam denotes the wave parameter, always taken
in (lambda_min, 0] with lambda_min = -sqrt((theta-8r)/(4a))):

    mu(lam)    = sqrt(theta*(theta - 8r - 4a*lam^2)) / 2
    psi-(lam)  = 1/4 - mu/(2 theta)        psi+(lam) = 1/4 + mu/(2 theta)
    E-(lam)    = rho + theta*psi-           E+(lam)   = rho + theta*psi+
    c+-(lam)   = -E+-(lam)/lam             (undefined at lam = 0)

exp(psi+- y^2) are strictly positive eigenfunctions of the one-particle
operator with eigenvalues E+-; they generate the two additive martingale
families evaluated in the martingale module.

Growth rates:

    delta(gamma)        = inf_lam { E-(lam) + lam*gamma }
    delta(gamma, kappa) = inf_lam { E-(lam) + lam*gamma - kappa^2 psi+(lam) }

count, per unit time, the particles near spatial position -gamma*t (and
type height kappa*sqrt(t)).  The ascent cost

    theta_cost(beta, kappa) = sup_lam { kappa^2 psi+(lam) - lam*beta }

is the exponential price for one lineage to climb rapidly to
(-beta*t, kappa*sqrt(t)).  All infima/suprema admit the explicit closed
forms implemented here; `numeric` cross-checks them by bracketed scalar
optimization and is kept deliberately independent of the closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar

from scipy import optimize

from .params import ModelParams


class LambdaOutOfRange(ValueError):
    """lam outside (lambda_min, 0]: mu(lam) would be non-real."""


class DomainError(ValueError):
    """Input outside the stated domain of a closed-form map."""


#: Optimizer bracket inset and tolerance for the numeric cross-checks.
BRACKET_EPS = 1e-9
OPT_XATOL = 1e-12


@dataclass(frozen=True)
class SpectralQuantities:
    """Per-lambda bundle of oscillator rate, exponents, eigenvalues, speeds."""

    lam: float
    mu: float
    psi_minus: float
    psi_plus: float
    e_minus: float
    e_plus: float
    c_minus: float | None  # None at lam = 0 (speeds divide by lam)
    c_plus: float | None

    def v_minus(self, y: float) -> float:
        """Eigenfunction exp(psi- * y^2)."""
        return math.exp(self.psi_minus * y * y)

    def v_plus(self, y: float) -> float:
        """Eigenfunction exp(psi+ * y^2); not square-integrable against phi."""
        return math.exp(self.psi_plus * y * y)


@dataclass(frozen=True)
class GrowthRateResult:
    """Value and optimizer of one of the variational rate formulas."""

    value: float
    argmin_lambda: float
    gamma: float
    kappa: float = 0.0


@dataclass(frozen=True)
class GrowthRate:
    """Almost-sure growth rate: a finite value or a minus-infinity sentinel.

    The sentinel is explicit so that -inf never enters float arithmetic;
    `boundary` flags the excluded case delta(gamma, kappa) = 0.
    """

    finite: bool
    value: float = 0.0
    boundary: bool = False

    MINUS_INF: ClassVar["GrowthRate"]

    def as_csv(self) -> str:
        return repr(self.value) if self.finite else "-inf"


GrowthRate.MINUS_INF = GrowthRate(finite=False)


def mu_lambda(p: ModelParams, lam: float) -> float:
    """Oscillator rate mu(lam); raises LambdaOutOfRange when non-real."""
    disc = p.theta - 8.0 * p.r - 4.0 * p.a * lam * lam
    if disc <= 0.0:
        raise LambdaOutOfRange(
            f"lam={lam} outside ({p.lambda_min}, 0]: mu would be non-real"
        )
    return 0.5 * math.sqrt(p.theta * disc)


def spectral(p: ModelParams, lam: float) -> SpectralQuantities:
    """All spectral quantities at lam in (lambda_min, 0]."""
    if lam > 0.0:
        raise LambdaOutOfRange(f"lam must be <= 0, got {lam}")
    mu = mu_lambda(p, lam)
    psi_m = 0.25 - mu / (2.0 * p.theta)
    psi_p = 0.25 + mu / (2.0 * p.theta)
    e_m = p.rho + p.theta * psi_m
    e_p = p.rho + p.theta * psi_p
    if lam == 0.0:
        c_m = c_p = None
    else:
        c_m = -e_m / lam
        c_p = -e_p / lam
    return SpectralQuantities(lam, mu, psi_m, psi_p, e_m, e_p, c_m, c_p)


def e_minus(p: ModelParams, lam: float) -> float:
    return p.rho + p.theta * (0.25 - mu_lambda(p, lam) / (2.0 * p.theta))

def e_plus(p: ModelParams, lam: float) -> float:
    return p.rho + p.theta * (0.25 + mu_lambda(p, lam) / (2.0 * p.theta))

def psi_minus(p: ModelParams, lam: float) -> float:
    return 0.25 - mu_lambda(p, lam) / (2.0 * p.theta)

def psi_plus(p: ModelParams, lam: float) -> float:
    return 0.25 + mu_lambda(p, lam) / (2.0 * p.theta)


def delta_gamma(p: ModelParams, gamma: float) -> GrowthRateResult:
    """Spatial growth rate delta(gamma) = inf_lam {E-(lam) + lam*gamma}.

    Closed form: rho + theta/4 - sqrt((theta-8r)(4 gamma^2 + theta a)/a)/4.
    The infimum is attained at lambda_gamma (0.0 is reported for gamma=0,
    where the infimum sits at the right endpoint of the open interval).
    """
    if gamma < 0.0:
        raise DomainError(f"gamma must be >= 0, got {gamma}")
    value = (
        p.rho
        + p.theta / 4.0
        - 0.25 * math.sqrt((p.theta - 8.0 * p.r) * (4.0 * gamma * gamma + p.theta * p.a) / p.a)
    )
    arg = lambda_gamma(p, gamma) if gamma > 0.0 else 0.0
    return GrowthRateResult(value=value, argmin_lambda=arg, gamma=gamma)


def lambda_gamma(p: ModelParams, gamma: float) -> float:
    """Optimizing lam for delta(gamma): dE-/dlam = -gamma."""
    if gamma <= 0.0:
        raise DomainError(f"gamma must be > 0, got {gamma}")
    return -gamma * math.sqrt(
        (p.theta - 8.0 * p.r) / (p.theta * p.a * p.a + 4.0 * p.a * gamma * gamma)
    )


def gamma_lambda(p: ModelParams, lam: float) -> float:
    """Inverse map: gamma(lam) = -dE-/dlam = |lam| a theta / (2 mu(lam))."""
    if not (p.lambda_min < lam < 0.0):
        raise DomainError(f"lam must be in (lambda_min, 0), got {lam}")
    return -lam * p.a * p.theta / (2.0 * mu_lambda(p, lam))


def legendre_pair(p: ModelParams, x: float, direction: str) -> float:
    """Convex-duality optimizer maps, mutual inverses.

    direction='gamma_to_lambda' maps gamma>0 to lambda_gamma;
    direction='lambda_to_gamma' maps lam in (lambda_min,0) to gamma_lambda.
    """
    if direction == "gamma_to_lambda":
        return lambda_gamma(p, x)
    if direction == "lambda_to_gamma":
        return gamma_lambda(p, x)
    raise DomainError(f"unknown direction {direction!r}")


def wave_speed(p: ModelParams) -> tuple[float, float]:
    """Asymptotic speed c_tilde of the extremal particle and its lam.

    c_tilde = sup{gamma : delta(gamma) > 0} = min over lam of c-(lam),
    the minimum being attained at lambda_tilde.
    """
    c_tilde = math.sqrt(
        2.0 * p.a * (p.r + p.rho + 2.0 * (2.0 * p.r + p.rho) ** 2 / (p.theta - 8.0 * p.r))
    )
    lam_tilde = -math.sqrt(
        2.0
        * (p.theta - 8.0 * p.r)
        * (p.theta * p.rho + 2.0 * p.rho * p.rho + p.r * p.theta)
        / (p.a * (p.theta + 4.0 * p.rho) ** 2)
    )
    return c_tilde, lam_tilde


def delta_gamma_kappa(p: ModelParams, gamma: float, kappa: float) -> GrowthRateResult:
    """Space-type growth rate delta(gamma, kappa).

    inf_lam {E-(lam) + lam*gamma - kappa^2 psi+(lam)}; closed form
    rho + (theta - kappa^2)/4
        - sqrt(theta(theta-8r)(4 a theta gamma^2 + a^2(theta+kappa^2)^2))/(4 theta a).
    """
    if gamma < 0.0 or kappa < 0.0:
        raise DomainError("gamma and kappa must be >= 0")
    k2 = kappa * kappa
    value = (
        p.rho
        + (p.theta - k2) / 4.0
        - math.sqrt(
            p.theta
            * (p.theta - 8.0 * p.r)
            * (4.0 * p.a * p.theta * gamma * gamma + p.a * p.a * (p.theta + k2) ** 2)
        )
        / (4.0 * p.theta * p.a)
    )
    arg = lambda_bar(p, gamma, kappa) if gamma > 0.0 else 0.0
    return GrowthRateResult(value=value, argmin_lambda=arg, gamma=gamma, kappa=kappa)


def lambda_bar(p: ModelParams, gamma: float, kappa: float) -> float:
    """Optimizing lam for delta(gamma, kappa)."""
    if gamma <= 0.0:
        raise DomainError(f"gamma must be > 0, got {gamma}")
    k2 = kappa * kappa
    return -gamma * math.sqrt(
        p.theta
        * (p.theta - 8.0 * p.r)
        / (p.a * p.a * (k2 + p.theta) ** 2 + 4.0 * p.a * gamma * gamma * p.theta)
    )


def theta_cost(p: ModelParams, beta: float, kappa: float) -> tuple[float, float]:
    """Rapid-ascent cost Theta(beta, kappa) and its optimizing lam.

    Theta = sup_lam {kappa^2 psi+(lam) - lam*beta}
          = kappa^2/4 + sqrt(theta(theta-8r)(a^2 kappa^4 + 4 a theta beta^2))/(4 a theta).

    The supremum sits at lambda_bar_ascent in (lambda_min, 0) for
    beta, kappa > 0; at lam -> 0 for beta = 0 and at lam -> lambda_min for
    kappa = 0 (boundary optimizers are reported as the boundary value).
    """
    if beta < 0.0 or kappa < 0.0:
        raise DomainError("beta and kappa must be >= 0")
    if beta == 0.0 and kappa == 0.0:
        raise DomainError("beta and kappa must not both be 0")
    k4 = kappa ** 4
    value = kappa * kappa / 4.0 + math.sqrt(
        p.theta * (p.theta - 8.0 * p.r) * (p.a * p.a * k4 + 4.0 * p.a * p.theta * beta * beta)
    ) / (4.0 * p.a * p.theta)
    if beta == 0.0:
        arg = 0.0
    elif kappa == 0.0:
        arg = p.lambda_min
    else:
        arg = lambda_bar_ascent(p, beta, kappa)
    return value, arg


def lambda_bar_ascent(p: ModelParams, beta: float, kappa: float) -> float:
    """Optimizing lam of the ascent cost for beta, kappa > 0."""
    if beta <= 0.0 or kappa <= 0.0:
        raise DomainError("beta and kappa must be > 0")
    k4 = kappa ** 4
    return -beta * math.sqrt(
        p.theta * (p.theta - 8.0 * p.r) / (p.a * p.a * k4 + 4.0 * p.a * p.theta * beta * beta)
    )


def optimal_split(p: ModelParams, gamma: float, kappa: float) -> tuple[float, float]:
    """Optimal division of the journey to (-gamma*t, kappa*sqrt(t)).

    Phase one covers spatial speed alpha_bar at zero type height, phase two
    climbs the remaining beta_bar = gamma - alpha_bar while ascending:

        alpha_bar = gamma * theta/(theta + kappa^2)
        beta_bar  = gamma * kappa^2/(theta + kappa^2)

    and delta(alpha_bar) - theta_cost(beta_bar, kappa) = delta(gamma, kappa).
    """
    if gamma <= 0.0:
        raise DomainError(f"gamma must be > 0, got {gamma}")
    if kappa < 0.0:
        raise DomainError(f"kappa must be >= 0, got {kappa}")
    k2 = kappa * kappa
    alpha_bar = gamma * p.theta / (p.theta + k2)
    beta_bar = gamma * k2 / (p.theta + k2)
    return alpha_bar, beta_bar


def growth_rate_D(p: ModelParams, gamma: float, kappa: float = 0.0,
                  boundary_tol: float = 1e-12) -> GrowthRate:
    """Almost-sure growth rate of the space(-type) particle counts.

    kappa = 0: delta(gamma) when gamma < c_tilde, minus infinity when
    gamma >= c_tilde.  kappa > 0: delta(gamma, kappa) when positive, minus
    infinity when negative; the boundary delta = 0 is excluded by the
    governing limit theorem and is reported with boundary=True.
    """
    if kappa == 0.0:
        c_tilde, _ = wave_speed(p)
        if gamma >= c_tilde:
            return GrowthRate(finite=False, boundary=abs(gamma - c_tilde) <= boundary_tol)
        return GrowthRate(finite=True, value=delta_gamma(p, gamma).value)
    d = delta_gamma_kappa(p, gamma, kappa).value
    if abs(d) <= boundary_tol:
        return GrowthRate(finite=True, value=d, boundary=True)
    if d < 0.0:
        return GrowthRate(finite=False)
    return GrowthRate(finite=True, value=d)


def martingale_decay_rate(p: ModelParams, lam: float, sign: str) -> float:
    """Exponential rate of log Z(t)/t for the additive martingales.

    Equals lam*(c(lam) - c*(lam)) where c is the speed of the chosen
    family and c* is c_tilde left of lambda_tilde and c-(lam) right of it
    (the two branches agree at lambda_tilde).  Zero exactly for the minus
    family right of lambda_tilde, where that martingale has a positive
    limit.
    """
    if sign not in ("plus", "minus"):
        raise DomainError(f"sign must be 'plus' or 'minus', got {sign!r}")
    if not (p.lambda_min < lam < 0.0):
        raise LambdaOutOfRange(f"lam must be in (lambda_min, 0), got {lam}")
    s = spectral(p, lam)
    _, lam_tilde = wave_speed(p)
    e_sign = s.e_plus if sign == "plus" else s.e_minus
    if lam <= lam_tilde:
        c_tilde, _ = wave_speed(p)
        # lam*(c_sign - c_tilde) with lam*c_sign = -E_sign
        return -e_sign - lam * c_tilde
    # c* = c-(lam): lam*(c_sign - c_minus) = E-(lam) - E_sign(lam)
    return s.e_minus - e_sign


# ---------------------------------------------------------------------------
# Numeric cross-checks: independent bracketed scalar optimization.
# ---------------------------------------------------------------------------

def _minimize_on_lambda(p: ModelParams, objective, eps: float = BRACKET_EPS):
    res = optimize.minimize_scalar(
        objective,
        bounds=(p.lambda_min + eps, -eps),
        method="bounded",
        options={"xatol": OPT_XATOL},
    )
    return res.x, res.fun


def numeric_delta_gamma(p: ModelParams, gamma: float) -> GrowthRateResult:
    """delta(gamma) by direct minimization of E-(lam) + lam*gamma."""
    arg, val = _minimize_on_lambda(p, lambda lam: e_minus(p, lam) + lam * gamma)
    return GrowthRateResult(value=val, argmin_lambda=arg, gamma=gamma)


def numeric_delta_gamma_kappa(p: ModelParams, gamma: float, kappa: float) -> GrowthRateResult:
    """delta(gamma, kappa) by direct minimization."""
    k2 = kappa * kappa
    arg, val = _minimize_on_lambda(
        p, lambda lam: e_minus(p, lam) + lam * gamma - k2 * psi_plus(p, lam)
    )
    return GrowthRateResult(value=val, argmin_lambda=arg, gamma=gamma, kappa=kappa)


def numeric_theta_cost(p: ModelParams, beta: float, kappa: float) -> tuple[float, float]:
    """Theta(beta, kappa) by direct maximization of kappa^2 psi+ - lam*beta."""
    k2 = kappa * kappa
    arg, negval = _minimize_on_lambda(
        p, lambda lam: -(k2 * psi_plus(p, lam) - lam * beta)
    )
    return -negval, arg


def numeric_wave_speed(p: ModelParams) -> tuple[float, float]:
    """(c_tilde, lambda_tilde) by minimizing c-(lam) = -E-(lam)/lam."""
    arg, val = _minimize_on_lambda(p, lambda lam: -e_minus(p, lam) / lam)
    return val, arg


def numeric_legendre_sup(p: ModelParams, lam: float,
                         gamma_hi: float | None = None) -> float:
    """E-(lam) recovered as sup over gamma of {delta(gamma) - gamma*lam}."""
    if gamma_hi is None:
        gamma_hi = 4.0 * wave_speed(p)[0]
    res = optimize.minimize_scalar(
        lambda g: -(delta_gamma(p, g).value - g * lam),
        bounds=(BRACKET_EPS, gamma_hi),
        method="bounded",
        options={"xatol": OPT_XATOL},
    )
    return -res.fun
