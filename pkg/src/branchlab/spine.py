"""Simulation under the spine-changed measure and importance estimators.

Under the changed measure (parameter lam in (lambda_min, 0)) the process
re-constructs path-wise as follows: one distinguished line, the spine,
diffuses with OUTWARD-drifting type dynamics

    d eta = mu(lam) eta ds + sqrt(theta) dB
    (exact transition: mean y e^{mu h}, variance theta(e^{2 mu h}-1)/(2 mu)),

moves spatially with conditional drift lam * a * eta^2 on top of the usual
time-changed Brownian motion, and branches at the doubled rate 2 R(eta).
At each spine birth one child, chosen uniformly, continues the spine; the
other roots an ordinary tree with the original-law dynamics.  The
single-line likelihood ratio is

    zeta(t) = v+(eta_t) 2^{n_t} e^{lam xi_t - E+ t},

a product of one-particle exponential martingales, and the change of
measure projected onto the tree filtration is the normalized plus
martingale Z+(t)/Z+(0).  Consequently, for any event A decidable from the
tree up to tau,

    P(A) = E_changed[ 1_A * Z+(0)/Z+(tau) ],

which `importance_estimate` evaluates with log-domain weights over all
particles of the realized tree (spine included).  Conditioned on the
spine, the expectation of Z+(tau) splits into the birth-time sum plus the
spine term (`spine_decomposition_value`).

Spine birth counts within a step are Poisson with the trapezoid of the
doubled rate, so the conditional-Poisson law of n_tau given the path is
exact up to the step-end placement of the birth states (the same
O(h^2)-weak bias as the tree simulator, halved step because of the
doubled rate).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import logsumexp

from . import rng as rngmod
from .analytics import LambdaOutOfRange, lambda_bar_ascent, mu_lambda, psi_plus, e_plus
from .martingale import log_z_initial, z_value
from .mc import EstimatorResult
from .params import ModelParams
from .paths import AscentSpec, optimal_paths, tau_of_t
from .rng import Label
from .simulator import CapExceeded, Engine, PopulationSnapshot, SimConfig


class GridTooCoarse(ValueError):
    """Path-recording grid below 64 points per unit time."""


SPINE_STREAM: Label = (0,)

#: Fraction of cap-discarded replicas beyond which an estimate is flagged.
DEGENERACY_DISCARD_FRACTION = 0.01


@dataclass(frozen=True)
class ShortClimbSpec:
    """Tube event around the optimal ascent to (-beta*t, kappa*sqrt(t)).

    epsilon scales the type tube (half-width epsilon*sqrt(t)), delta the
    spatial tube (half-width delta*t).  The window tau comes from the
    ascent clock at lambda_bar_ascent(beta, kappa); it is 0 when t is too
    small for the climb formalism, which makes the event degenerate.
    """

    epsilon: float
    delta: float
    t: float
    beta: float
    kappa: float

    def __post_init__(self):
        if self.epsilon <= 0.0 or self.delta <= 0.0:
            raise ValueError("epsilon and delta must be > 0 (inf allowed)")

    def lambda_ascent(self, p: ModelParams) -> float:
        return lambda_bar_ascent(p, self.beta, self.kappa)

    def tau(self, p: ModelParams) -> float:
        return tau_of_t(p, self.lambda_ascent(p), self.t)

    def tube(self, p: ModelParams) -> Callable[[float, float, float], bool]:
        """Membership test (s, x, y) -> bool against the optimal pair."""
        if math.isinf(self.epsilon) and math.isinf(self.delta):
            return lambda s, x, y: True
        tau = self.tau(p)
        if tau <= 0.0:
            return lambda s, x, y: True
        lam = self.lambda_ascent(p)
        asc = optimal_paths(p, AscentSpec(self.beta, self.kappa, self.t), lam, tau)
        eps_abs = self.epsilon * math.sqrt(self.t)
        del_abs = self.delta * self.t
        y_path, x_path = asc.y_path, asc.x_path

        def member(s, x, y):
            yb = y_path(s)[0]
            xb = x_path(s)[0]
            return abs(y - yb) < eps_abs and abs(x - xb) < del_abs

        return member


@dataclass
class SpineRun:
    """One realization under the changed measure."""

    lam: float
    tau: float
    spine_trace: list[tuple[float, float, float, bool]]  # (s, xi, eta, is_birth)
    spine_birth_states: list[tuple[float, float, float]]  # (S, xi_S, eta_S)
    n_tau: int
    spine_final: tuple[float, float]  # (xi_tau, eta_tau)
    spine_label: Label
    spine_in_tube: bool
    snapshot: PopulationSnapshot | None  # all particles at tau (with subtrees)
    truncated: bool

    @property
    def spine_birth_times(self) -> list[float]:
        return [s for s, _, _ in self.spine_birth_states]


def run_spine(p: ModelParams, lam: float, start: tuple[float, float], tau: float,
              cfg: SimConfig, replica: int = 0, grow_subtrees: bool = True,
              tube: Callable[[float, float, float], bool] | None = None,
              record_trace: bool = False) -> SpineRun:
    """Simulate the spine (and, optionally, its off-line subtrees) to tau.

    The spine's own step budget is c_step/(2 R(eta)) because its branch
    rate is doubled.  Subtrees are grown by the ordinary engine with the
    original-law dynamics, rooted at the non-spine child of each birth.
    With `tube` given, per-particle tube membership is tracked at the
    cfg.grid_dt boundaries (over-acceptance between grid points is the
    documented bias direction).
    """
    if not (p.lambda_min < lam < 0.0):
        raise LambdaOutOfRange(f"lam must be in (lambda_min, 0), got {lam}")
    if tau <= 0.0:
        raise ValueError(f"tau must be > 0, got {tau}")
    cfg = SimConfig(h_max=cfg.h_max, c_step=cfg.c_step, cap=cfg.cap,
                    snapshot_times=(tau,), seed=cfg.seed,
                    store_labels=cfg.store_labels, grid_dt=cfg.grid_dt)
    engine = Engine(p, cfg, replica, tube=tube)
    mu = mu_lambda(p, lam)
    theta, a, r, rho = p.theta, p.a, p.r, p.rho
    var_scale = theta / (2.0 * mu)

    gen = rngmod.stream(cfg.seed, replica, SPINE_STREAM)
    xi, eta = float(start[0]), float(start[1])
    s = 0.0
    label: Label = ()
    in_tube = True
    n_tau = 0
    birth_states: list[tuple[float, float, float]] = []
    trace: list[tuple[float, float, float, bool]] = []
    if record_trace:
        trace.append((0.0, xi, eta, False))

    b_times, b_snap = engine.b_times, engine.b_snap
    i = 0
    nb_total = len(b_times)
    truncated = False
    while i < nb_total and not truncated:
        rate2 = 2.0 * (rho + r * eta * eta)
        h_adapt = cfg.h_max if rate2 <= 0.0 else min(cfg.h_max, cfg.c_step / rate2)
        nb = b_times[i]
        hit = nb - s <= h_adapt
        h = nb - s if hit else h_adapt

        em = math.exp(mu * h)
        eta2 = eta * em + math.sqrt(var_scale * (em * em - 1.0)) * gen.standard_normal()
        var = 0.5 * a * h * (eta * eta + eta2 * eta2)
        xi2 = xi + lam * var
        if var > 0.0:
            xi2 += math.sqrt(var) * gen.standard_normal()
        births = int(gen.poisson(h * (rate2 + 2.0 * (rho + r * eta2 * eta2)) / 2.0))

        xi, eta = xi2, eta2
        s = nb if hit else s + h

        if hit and tube is not None and in_tube:
            in_tube = tube(s, xi, eta)

        for _ in range(births):
            n_tau += 1
            engine.branches += 1
            if 1 + engine.branches > cfg.cap:
                truncated = True
                break
            birth_states.append((s, xi, eta))
            if record_trace:
                trace.append((s, xi, eta, True))
            child = 1 if gen.random() < 0.5 else 2
            off = label + (3 - child,)
            label = label + (child,)
            if grow_subtrees:
                engine.add_root(off, xi, eta, s, in_tube=in_tube)

        if hit:
            if record_trace:
                trace.append((s, xi, eta, False))
            i += 1

    snapshot = None
    if truncated:
        engine.truncated = True
    else:
        if grow_subtrees:
            engine.drain()
        truncated = engine.truncated
        if not truncated:
            si = engine._snap_lookup.get(tau)
            engine.buckets[si].append((label, xi, eta, s, in_tube))
            snapshot = engine.snapshots()[si]

    return SpineRun(lam=lam, tau=tau, spine_trace=trace,
                    spine_birth_states=birth_states, n_tau=n_tau,
                    spine_final=(xi, eta), spine_label=label,
                    spine_in_tube=in_tube, snapshot=snapshot,
                    truncated=truncated)


def zeta_tilde(p: ModelParams, lam: float,
               state: tuple[float, float, int, float]) -> float:
    """log of the single-line likelihood ratio v+(eta) 2^n e^{lam xi - E+ t}."""
    xi, eta, n, t = state
    return (psi_plus(p, lam) * eta * eta + n * math.log(2.0)
            + lam * xi - e_plus(p, lam) * t)


@dataclass(frozen=True)
class ImportanceResult:
    """Unbiased event-probability estimate with weight diagnostics."""

    result: EstimatorResult
    log_weight_min: float
    log_weight_median: float
    log_weight_max: float
    hits: int


def importance_estimate(p: ModelParams, lam: float, event: Callable[[SpineRun], bool],
                        tau: float, start: tuple[float, float], replicas: int,
                        seed: int, cfg: SimConfig | None = None,
                        tube: Callable[[float, float, float], bool] | None = None) -> ImportanceResult:
    """P(event) as the changed-measure mean of 1_event Z+(0)/Z+(tau).

    Cap-truncated replicas are discarded and counted; the estimate is
    flagged 'is_degenerate' when more than 1% are discarded.
    """
    if cfg is None:
        cfg = SimConfig(h_max=0.05, c_step=0.02, snapshot_times=(tau,), seed=seed,
                        store_labels=False)
    else:
        cfg = SimConfig(h_max=cfg.h_max, c_step=cfg.c_step, cap=cfg.cap,
                        snapshot_times=(tau,), seed=seed,
                        store_labels=cfg.store_labels, grid_dt=cfg.grid_dt)
    log_z0 = log_z_initial(p, lam, "plus", start)
    vals = np.zeros(replicas)
    log_weights = []
    kept = 0
    hits = 0
    discarded = 0
    for rep in range(replicas):
        run_ = run_spine(p, lam, start, tau, cfg, replica=rep,
                         grow_subtrees=True, tube=tube)
        if run_.truncated:
            discarded += 1
            continue
        lw = log_z0 - z_value(run_.snapshot, p, lam, "plus")
        log_weights.append(lw)
        if event(run_):
            hits += 1
            vals[kept] = math.exp(lw)
        kept += 1
    if kept == 0:
        raise CapExceeded("all replicas hit the population cap")
    flags = []
    if discarded > DEGENERACY_DISCARD_FRACTION * replicas:
        flags.append("is_degenerate")
    arr = vals[:kept]
    mean = float(arr.mean())
    se = float(arr.std(ddof=1) / math.sqrt(kept)) if kept > 1 else float("nan")
    res = EstimatorResult(estimate=mean, std_error=se, replicas=kept, seed=seed,
                          discarded=discarded, flags=tuple(flags))
    lw = np.asarray(log_weights)
    return ImportanceResult(result=res, log_weight_min=float(lw.min()),
                            log_weight_median=float(np.median(lw)),
                            log_weight_max=float(lw.max()), hits=hits)


def short_climb_indicator(run: SpineRun, spec: ShortClimbSpec, p: ModelParams,
                          grid_dt: float | None) -> bool:
    """True iff some particle stayed inside the tube at every grid time.

    Requires the run to have been simulated with the spec's tube and a
    grid of at least 64 points per unit time.
    """
    if grid_dt is None or grid_dt > 1.0 / 64.0 + 1e-12:
        raise GridTooCoarse(f"need grid_dt <= 1/64, got {grid_dt}")
    if math.isinf(spec.epsilon) and math.isinf(spec.delta):
        return run.snapshot is not None and len(run.snapshot) > 0
    if run.spine_in_tube:
        return True
    snap = run.snapshot
    return snap is not None and snap.in_tube is not None and bool(snap.in_tube.any())


def short_climb_probability(p: ModelParams, spec: ShortClimbSpec,
                            replicas: int, seed: int,
                            cfg: SimConfig | None = None) -> ImportanceResult:
    """Importance-sampled probability of the short-climb tube event.

    The sampling parameter is pinned to lambda_bar_ascent(beta, kappa).
    A zero clock (t below the climb threshold) makes the event hold
    trivially and the probability is returned as exactly 1.
    """
    tau = spec.tau(p)
    if tau <= 0.0:
        res = EstimatorResult(estimate=1.0, std_error=0.0, replicas=replicas,
                              seed=seed, flags=("degenerate_tau",))
        return ImportanceResult(result=res, log_weight_min=0.0,
                                log_weight_median=0.0, log_weight_max=0.0,
                                hits=replicas)
    lam = spec.lambda_ascent(p)
    grid_dt = min(1.0 / 64.0, tau / 16.0)
    if cfg is None:
        cfg = SimConfig(h_max=0.05, c_step=0.02, snapshot_times=(tau,), seed=seed,
                        store_labels=False, grid_dt=grid_dt)
    else:
        cfg = SimConfig(h_max=cfg.h_max, c_step=cfg.c_step, cap=cfg.cap,
                        snapshot_times=(tau,), seed=seed,
                        store_labels=cfg.store_labels, grid_dt=grid_dt)
    tube = spec.tube(p)
    event = lambda run_: short_climb_indicator(run_, spec, p, grid_dt)
    return importance_estimate(p, lam, event, tau, start=(0.0, 0.0),
                               replicas=replicas, seed=seed, cfg=cfg, tube=tube)


def spine_decomposition_value(run: SpineRun, p: ModelParams,
                              lam: float) -> tuple[float, float]:
    """Log-domain (sum term, spine term) of the conditional Z+ expectation.

    sum term: logsumexp over spine births of psi+ eta_S^2 + lam xi_S - E+ S;
    spine term: the same functional at (tau, final state).  An empty birth
    list yields -inf for the sum term (log of an empty sum).
    """
    pp, ep = psi_plus(p, lam), e_plus(p, lam)
    if run.spine_birth_states:
        terms = [pp * eta * eta + lam * xi - ep * s
                 for s, xi, eta in run.spine_birth_states]
        sum_term = float(logsumexp(terms))
    else:
        sum_term = -math.inf
    xi_t, eta_t = run.spine_final
    spine_term = pp * eta_t * eta_t + lam * xi_t - ep * run.tau
    return sum_term, spine_term


def run_tagged_line(p: ModelParams, lam: float, start: tuple[float, float],
                    t: float, replica: int, seed: int,
                    h_max: float = 0.02, c_step: float = 0.01) -> tuple[float, float, int]:
    """One original-law line of descent with its birth counter.

    Type reverts at rate theta/2, space is driftless, and births along
    the line arrive as Poisson counts of the trapezoid R(eta); which
    child continues is irrelevant to the likelihood-ratio value.
    Used to check that zeta is a martingale under the original law.
    """
    gen = rngmod.stream(seed, replica, SPINE_STREAM)
    theta, a, r, rho = p.theta, p.a, p.r, p.rho
    x, y = float(start[0]), float(start[1])
    s = 0.0
    n = 0
    while s < t - 1e-15:
        rate0 = rho + r * y * y
        h = h_max if rate0 <= 0.0 else min(h_max, c_step / rate0)
        h = min(h, t - s)
        ey = math.exp(-0.5 * theta * h)
        y2 = y * ey + math.sqrt(1.0 - ey * ey) * gen.standard_normal()
        var = 0.5 * a * h * (y * y + y2 * y2)
        x2 = x + math.sqrt(var) * gen.standard_normal() if var > 0.0 else x
        n += int(gen.poisson(0.5 * h * (rate0 + rho + r * y2 * y2)))
        x, y = x2, y2
        s += h
    return x, y, n
