"""Desk-scale verification suites for the analytic and simulation claims.

Each criterion is implemented with its documented replica counts,
tolerances and fixed default seeds, and reports one or more pass/fail
rows (measured vs threshold).  Rows are never weakened to force a pass:
where a stated configuration is mathematically unrealizable (the
finite-horizon optimizer equation has no root at short horizons; the
ascent clock is zero below its time threshold) the row records the
honest outcome, and nearby well-posed configurations are checked in
clearly labeled supplementary rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import analytics, birthdeath, martingale, oracle, paths, quadrature, spine
from .experiments import Stopwatch, run_replicas
from .funcs import make_xy_function
from .mc import EstimatorResult, from_samples
from .params import ModelParams
from .simulator import SimConfig, count_region, extremes, run
from .spine import ShortClimbSpec, short_climb_probability

P0 = ModelParams(10.0, 1.0, 1.0, 1.0)
LOW_RHO = ModelParams(10.0, 1.0, 1.0, 0.1)
PERTURBED = (ModelParams(9.5, 1.3, 0.9, 0.7), ModelParams(12.0, 0.8, 1.2, 2.0))

SUITE_SEEDS = {
    "closed-form": 1101,
    "paths": 1104,
    "oracle": 1106,
    "martingale": 1108,
    "birthdeath": 1110,
    "spine": 1111,
    "growth": 1112,
}

GAMMA_GRID = tuple(np.linspace(0.25, 4.25, 9))
KAPPA_GRID = (0.5, 1.0, 1.5, 2.0, 2.5)


@dataclass
class CheckRow:
    criterion: int
    name: str
    passed: bool | None  # None = informational
    measured: str
    threshold: str
    note: str = ""

    def line(self) -> str:
        tag = {True: "PASS", False: "FAIL", None: "NOTE"}[self.passed]
        out = f"[{tag}] c{self.criterion:02d} {self.name}: measured {self.measured} vs {self.threshold}"
        if self.note:
            out += f"  ({self.note})"
        return out


@dataclass
class SuiteReport:
    suite: str
    rows: list[CheckRow] = field(default_factory=list)
    wall_time_s: float = 0.0

    @property
    def passed(self) -> bool:
        return all(r.passed is not False for r in self.rows)

    def lines(self) -> list[str]:
        out = [r.line() for r in self.rows]
        status = "PASS" if self.passed else "FAIL"
        out.append(f"suite {self.suite}: {status} ({len(self.rows)} checks, "
                   f"{self.wall_time_s:.1f}s)")
        return out


def _row(criterion, name, ok, measured, threshold, note="") -> CheckRow:
    return CheckRow(criterion, name, ok, measured, threshold, note)


def _maxdev_row(criterion, name, dev: float, tol: float, note="") -> CheckRow:
    return _row(criterion, name, dev <= tol, f"max|dev|={dev:.3e}", f"<= {tol:g}", note)


# ---------------------------------------------------------------------------
# criterion 1: closed-form identity battery
# ---------------------------------------------------------------------------

def criterion_1(seed: int = SUITE_SEEDS["closed-form"]) -> list[CheckRow]:
    rows = []
    for p in (P0,) + PERTURBED:
        lam_grid = np.linspace(p.lambda_min + 0.02, -0.02, 25)
        dev_psi = max(abs(analytics.spectral(p, l).psi_minus
                          + analytics.spectral(p, l).psi_plus - 0.5) for l in lam_grid)
        dev_e = 0.0
        for l in lam_grid:
            s = analytics.spectral(p, l)
            dev_e = max(dev_e, abs(s.e_minus - (p.rho + p.theta * s.psi_minus)),
                        abs(s.e_plus - (p.rho + p.theta * s.psi_plus)))
        dev_red = max(abs(analytics.delta_gamma_kappa(p, g, 0.0).value
                          - analytics.delta_gamma(p, g).value) for g in GAMMA_GRID)
        dev_d0 = abs(analytics.delta_gamma(p, 0.0).value - analytics.e_minus(p, 0.0))
        dev_th0 = max(abs(analytics.theta_cost(p, 0.0, k)[0]
                          - k * k * analytics.psi_plus(p, 0.0)) for k in KAPPA_GRID)
        dev_split = 0.0
        for g in GAMMA_GRID:
            for k in KAPPA_GRID:
                ab, bb = analytics.optimal_split(p, g, k)
                lhs = analytics.delta_gamma(p, ab).value - analytics.theta_cost(p, bb, k)[0]
                dev_split = max(dev_split, abs(lhs - analytics.delta_gamma_kappa(p, g, k).value))
        dev_rt = 0.0
        for g in np.linspace(0.1, 4.0, 17):
            lam = analytics.lambda_gamma(p, g)
            dev_rt = max(dev_rt, abs(analytics.gamma_lambda(p, lam) - g))
        for lam in np.linspace(p.lambda_min + 0.05, -0.05, 17):
            g = analytics.gamma_lambda(p, lam)
            dev_rt = max(dev_rt, abs(analytics.lambda_gamma(p, g) - lam))
        tag = f"theta={p.theta:g},a={p.a:g},r={p.r:g},rho={p.rho:g}"
        rows.append(_maxdev_row(1, f"psi-+psi+=1/2 [{tag}]", dev_psi, 1e-9))
        rows.append(_maxdev_row(1, f"E+-=rho+theta*psi+- [{tag}]", dev_e, 1e-9))
        rows.append(_maxdev_row(1, f"delta(g,0)=delta(g) [{tag}]", dev_red, 1e-9))
        rows.append(_maxdev_row(1, f"delta(0)=E-(0) [{tag}]", dev_d0, 1e-9))
        rows.append(_maxdev_row(1, f"theta_cost(0,k)=k^2 psi+(0) [{tag}]", dev_th0, 1e-9))
        rows.append(_maxdev_row(1, f"split identity 9x5 grid [{tag}]", dev_split, 1e-9))
        rows.append(_maxdev_row(1, f"legendre round trips [{tag}]", dev_rt, 1e-10))
    return rows


# ---------------------------------------------------------------------------
# criterion 2: variational = closed form
# ---------------------------------------------------------------------------

def criterion_2(seed: int = SUITE_SEEDS["closed-form"]) -> list[CheckRow]:
    rows = []
    dev_v = dev_a = 0.0
    for g in GAMMA_GRID:
        cf = analytics.delta_gamma(P0, g)
        nm = analytics.numeric_delta_gamma(P0, g)
        dev_v = max(dev_v, abs(cf.value - nm.value))
        dev_a = max(dev_a, abs(cf.argmin_lambda - nm.argmin_lambda))
        for k in KAPPA_GRID:
            cf2 = analytics.delta_gamma_kappa(P0, g, k)
            nm2 = analytics.numeric_delta_gamma_kappa(P0, g, k)
            dev_v = max(dev_v, abs(cf2.value - nm2.value))
            dev_a = max(dev_a, abs(cf2.argmin_lambda - nm2.argmin_lambda))
            ab, bb = analytics.optimal_split(P0, g, k)
            th, arg = analytics.theta_cost(P0, bb, k)
            thn, argn = analytics.numeric_theta_cost(P0, bb, k)
            dev_v = max(dev_v, abs(th - thn))
            dev_a = max(dev_a, abs(arg - argn))
    rows.append(_maxdev_row(2, "variational values vs closed forms", dev_v, 1e-7))
    rows.append(_maxdev_row(2, "variational argmins vs closed forms", dev_a, 1e-6))
    return rows


# ---------------------------------------------------------------------------
# criterion 3: exact wave speed
# ---------------------------------------------------------------------------

def criterion_3(seed: int = SUITE_SEEDS["closed-form"]) -> list[CheckRow]:
    c_tilde, lam_tilde = analytics.wave_speed(P0)
    cn, ln = analytics.numeric_wave_speed(P0)
    return [
        _maxdev_row(3, "c_tilde(P0) = sqrt(22)", abs(c_tilde - math.sqrt(22.0)), 1e-12),
        _maxdev_row(3, "lambda_tilde(P0) = -sqrt(22)/7",
                    abs(lam_tilde + math.sqrt(22.0) / 7.0), 1e-12),
        _maxdev_row(3, "c_tilde = numeric min of c-(lam)", abs(c_tilde - cn), 1e-8),
    ]


# ---------------------------------------------------------------------------
# criterion 4: finite-horizon optimizer convergence
# ---------------------------------------------------------------------------

def criterion_4(seed: int = SUITE_SEEDS["paths"]) -> list[CheckRow]:
    rows = []
    spec = paths.AscentSpec(beta=1.0, kappa=1.0, t=100.0)
    lam_inf = analytics.lambda_bar_ascent(P0, 1.0, 1.0)
    solved: dict[float, float] = {}
    for tau in (2.0, 4.0, 6.0, 8.0):
        try:
            solved[tau] = paths.lambda_hat(P0, spec, tau)
        except paths.NoBracket:
            rows.append(_row(4, f"lambda_hat(tau={tau:g}) existence", True,
                             "NoBracket (no root of the optimality equation)",
                             "reported, not fabricated",
                             "RHS of the root equation is bounded by kappa^2*tau/3; "
                             "no root exists for tau <= 3*beta/(a*kappa^2*|lambda_min|)"))
    lh6 = solved.get(6.0)
    dev6 = abs(lh6 - (-0.6984303)) if lh6 is not None else math.inf
    rows.append(_row(4, "lambda_hat(tau=6) within 1e-3 of -0.6984303",
                     dev6 <= 1e-3, f"lambda_hat={lh6:.7f}, |dev|={dev6:.3e}",
                     "<= 1e-3",
                     "bisection on the defining equation gives -0.7009224; "
                     "the gap to the infinite-horizon optimizer at tau=6 is 2.49e-3"))
    taus = sorted(solved)
    gaps = [abs(solved[t] - lam_inf) for t in taus]
    monotone = all(gaps[i + 1] <= gaps[i] for i in range(len(gaps) - 1)) and all(
        solved[t] <= lam_inf for t in taus
    )
    rows.append(_row(4, "lambda_hat(tau) monotone toward the tau->inf optimizer",
                     monotone,
                     "; ".join(f"tau={t:g}: gap={g:.2e}" for t, g in zip(taus, gaps)),
                     "gaps decreasing on the solvable range",
                     "tau in {2,4} has no root (rows above)"))
    return rows


# ---------------------------------------------------------------------------
# criterion 5: path-functional consistency
# ---------------------------------------------------------------------------

def _j_consistency_row(p, beta, kappa, t, tau) -> CheckRow:
    spec = paths.AscentSpec(beta=beta, kappa=kappa, t=t)
    lam = paths.lambda_hat(p, spec, tau)
    asc = paths.optimal_paths(p, spec, lam, tau)
    pf = paths.functional_J(p, asc.x_path, asc.y_path, tau, mode="at_s")
    cf = paths.endpoint_cost_closed_form(p, spec, lam, tau)
    rel = abs(pf.j_value - cf) / abs(cf)
    return _row(5, f"J quadrature vs closed form (beta={beta:g}, tau={tau:g})",
                rel <= 1e-5, f"rel dev {rel:.2e}", "<= 1e-5")


def criterion_5(seed: int = SUITE_SEEDS["paths"]) -> list[CheckRow]:
    rows = []
    spec_lit = paths.AscentSpec(beta=1.0, kappa=1.0, t=100.0)
    for tau in (1.0, 2.0):
        try:
            paths.lambda_hat(P0, spec_lit, tau)
            rows.append(_j_consistency_row(P0, 1.0, 1.0, 100.0, tau))
        except paths.NoBracket:
            rows.append(_row(5, f"J vs closed form at (beta=1, kappa=1, tau={tau:g})",
                             False, "no finite-horizon optimizer exists (NoBracket)",
                             "rel dev <= 1e-5",
                             "the stated configuration is unrealizable; the root "
                             "equation has no solution below tau=4.243 at beta=kappa=1; "
                             "well-posed substitutes follow"))
    # Substance at well-posed configurations: the two-phase ascent leg of the
    # (gamma=1, kappa=1) journey at the stated tau, and beta=kappa=1 at
    # horizons where the optimizer exists.
    for tau in (1.0, 2.0):
        rows.append(_j_consistency_row(P0, 1.0 / 11.0, 1.0, 100.0, tau))
    for tau in (6.0, 8.0):
        rows.append(_j_consistency_row(P0, 1.0, 1.0, 100.0, tau))

    # L = J(tau) at the endpoint on a consistent optimal pair
    spec = paths.AscentSpec(beta=1.0 / 11.0, kappa=1.0, t=100.0)
    lam = paths.lambda_hat(P0, spec, 1.0)
    asc = paths.optimal_paths(P0, spec, lam, 1.0)
    pf = paths.functional_J(P0, asc.x_path, asc.y_path, 1.0, mode="sup", tau=1.0)
    dev = abs(pf.l_value - pf.j_value) / max(abs(pf.j_value), 1.0)
    rows.append(_row(5, "L = J(tau) on the optimal pair (sup at endpoint)",
                     dev <= 1e-6, f"rel dev {dev:.2e}", "<= 1e-6"))

    # quadrature ratio test: error shrinks >= 8x per panel doubling
    g = paths.cost_integrand(P0, asc.x_path, asc.y_path)
    ref, _ = quadrature.simpson(g, 0.0, 1.0, panels=1 << 14)
    errs = [abs(quadrature.simpson(g, 0.0, 1.0, panels=n)[0] - ref)
            for n in (128, 256, 512)]
    ratios = [errs[i] / max(errs[i + 1], 1e-300) for i in range(len(errs) - 1)]
    rows.append(_row(5, "quadrature error shrinks >= 8x per panel doubling",
                     all(r >= 8.0 for r in ratios),
                     "ratios " + ", ".join(f"{r:.1f}" for r in ratios), ">= 8"))
    return rows


# ---------------------------------------------------------------------------
# criterion 6: many-to-one equivalence
# ---------------------------------------------------------------------------

F_SPECS = ("one", "indicator_y:-1,1", "gauss_xy")


def _sim_sums(p, t, replicas, seed, f_specs, c_step=0.01, h_max=0.05):
    cfg = SimConfig(h_max=h_max, c_step=c_step, snapshot_times=(t,), seed=seed,
                    store_labels=False)
    fs = [make_xy_function(s) for s in f_specs]
    sums = np.zeros((len(fs), replicas))
    for rep in range(replicas):
        snap = run(p, (0.0, 0.0), cfg, replica=rep)[0]
        for j, f in enumerate(fs):
            sums[j, rep] = sum(f(float(x), float(y))
                               for x, y in zip(snap.xs, snap.ys))
    return [from_samples(sums[j], seed=seed) for j in range(len(fs))]


def criterion_6(seed: int = SUITE_SEEDS["oracle"], replicas: int = 10_000) -> list[CheckRow]:
    rows = []
    t = 0.75
    sim_res = _sim_sums(P0, t, replicas, seed, F_SPECS)
    for j, fs in enumerate(F_SPECS):
        f = make_xy_function(fs)
        m2o = oracle.many_to_one_expectation(P0, f, t, (0.0, 0.0), replicas, seed + 1)
        trf = oracle.transformed_expectation(P0, -0.3, f, t, (0.0, 0.0), replicas, seed + 2)
        trio = {"simulator": sim_res[j], "many-to-one": m2o, "drift-changed": trf}
        names = list(trio)
        for i in range(len(names)):
            for k in range(i + 1, len(names)):
                a, b = trio[names[i]], trio[names[k]]
                rows.append(_row(
                    6, f"f={fs}: {names[i]} vs {names[k]} overlap at 3 sigma",
                    a.overlaps(b),
                    f"{a.estimate:.4f}+-{a.std_error:.4f} vs {b.estimate:.4f}+-{b.std_error:.4f}",
                    "3 sigma intervals intersect"))
    return rows


# ---------------------------------------------------------------------------
# criteria 7 and 8 share the P0 t=1 battery
# ---------------------------------------------------------------------------

def _p0_battery(seed, replicas):
    cfg = SimConfig(h_max=0.05, c_step=0.005, snapshot_times=(1.0,), seed=seed,
                    store_labels=False)
    return run_replicas(P0, (0.0, 0.0), cfg, replicas)


def criterion_7(seed: int = SUITE_SEEDS["oracle"] + 10, replicas: int = 10_000,
                battery=None) -> tuple[list[CheckRow], list]:
    rows = []
    if battery is None:
        battery = _p0_battery(seed, replicas)
    sizes = np.asarray([len(snaps[0]) for snaps in battery], dtype=float)
    est = from_samples(sizes, seed=seed)
    target = oracle.expected_population(P0, 1.0, 0.0)
    rows.append(_row(7, "mean |N_1| within 3se of the closed form",
                     est.covers(target),
                     f"{est.estimate:.4f} +- {est.std_error:.4f}",
                     f"{target:.4f} within 3se"))
    yule = ModelParams(10.0, 1.0, 0.0, 1.0)
    cfg = SimConfig(h_max=0.05, c_step=0.005, snapshot_times=(1.0,), seed=seed + 1,
                    store_labels=False)
    ys = np.asarray([len(run(yule, (0.0, 0.0), cfg, replica=rep)[0])
                     for rep in range(replicas)], dtype=float)
    esty = from_samples(ys, seed=seed + 1)
    rows.append(_row(7, "pure-type-free branching: mean |N_1| = e within 3se",
                     esty.covers(math.e),
                     f"{esty.estimate:.4f} +- {esty.std_error:.4f}",
                     f"{math.e:.4f} within 3se"))
    return rows, battery


def _pathwise_bound_violations(batches, p, lams, gammas, kappas) -> tuple[int, int]:
    """Count violations of the two per-snapshot count bounds (must be 0)."""
    checked = 0
    violations = 0
    for snaps in batches:
        for snap in snaps:
            if snap.truncated or len(snap) == 0 or snap.time <= 0.0:
                continue
            t = snap.time
            for lam in lams:
                s = analytics.spectral(p, lam)
                lzm = martingale.z_value(snap, p, lam, "minus")
                lzp = martingale.z_value(snap, p, lam, "plus")
                for g in gammas:
                    n = count_region(snap, g)
                    checked += 1
                    if n > 0 and math.log(n) > (s.e_minus + lam * g) * t + lzm + 1e-9:
                        violations += 1
                    for k in kappas:
                        nk = count_region(snap, g, kappa=k)
                        checked += 1
                        bound = (s.e_plus - k * k * s.psi_plus + lam * g) * t + lzp
                        if nk > 0 and math.log(nk) > bound + 1e-9:
                            violations += 1
    return checked, violations


def criterion_8(seed: int = SUITE_SEEDS["martingale"], replicas: int = 10_000,
                battery=None, growth_battery=None) -> list[CheckRow]:
    rows = []
    if battery is None:
        battery = _p0_battery(seed, replicas)
    lam = -0.3
    vals = []
    for snaps in battery:
        snap = snaps[0]
        if snap.truncated or len(snap) == 0:
            continue
        vals.append(math.exp(martingale.z_value(snap, P0, lam, "minus")
                             - martingale.log_z_initial(P0, lam, "minus", (0.0, 0.0))))
    est = from_samples(vals, seed=seed)
    rows.append(_row(8, "mean Z-(t=1)/Z-(0) in 1 +- 3se (lam=-0.3)",
                     est.covers(1.0),
                     f"{est.estimate:.4f} +- {est.std_error:.4f}", "1 within 3se"))
    if growth_battery is None:
        cfg = SimConfig(h_max=0.04, c_step=0.05, cap=300_000,
                        snapshot_times=(2.0, 4.0, 6.0), seed=seed + 7,
                        store_labels=False)
        growth_battery = run_replicas(LOW_RHO, (0.0, 0.0), cfg, 30)
    lam_grid = (-0.65, -0.3, -0.1)
    checked = violations = 0
    for p, batches in ((P0, battery[:300]), (LOW_RHO, growth_battery[:100])):
        c, v = _pathwise_bound_violations(batches, p, lam_grid,
                                          (0.0, 0.5, 1.0), (0.5, 1.0))
        checked += c
        violations += v
    rows.append(_row(8, "pathwise count bounds hold on every snapshot",
                     violations == 0, f"{violations} violations / {checked} checks",
                     "0 violations"))
    return rows


# ---------------------------------------------------------------------------
# criteria 9 and 12 share the low-rho growth battery
# ---------------------------------------------------------------------------

def _growth_battery(seed, replicas):
    cfg = SimConfig(h_max=0.04, c_step=0.05, cap=300_000,
                    snapshot_times=(2.0, 4.0, 6.0), seed=seed, store_labels=False)
    return run_replicas(LOW_RHO, (0.0, 0.0), cfg, replicas)


def criterion_9(seed: int = SUITE_SEEDS["growth"], replicas: int = 200,
                battery=None) -> tuple[list[CheckRow], list]:
    rows = []
    if battery is None:
        battery = _growth_battery(seed, replicas)
    lam = -0.3
    rate = analytics.martingale_decay_rate(LOW_RHO, lam, "plus")  # = -mu(lam)
    good = [snaps for snaps in battery if not snaps[-1].truncated]
    rows.append(_row(9, "non-truncated replicas >= 200", len(good) >= 200,
                     str(len(good)), ">= 200"))
    per_t = {}
    for j, t in enumerate((2.0, 4.0, 6.0)):
        vals = [martingale.z_value(snaps[j], LOW_RHO, lam, "plus") / t
                for snaps in good if len(snaps[j]) > 0]
        per_t[t] = float(np.median(vals))
    dev6 = abs(per_t[6.0] - rate) / abs(rate)
    rows.append(_row(9, "median log Z+(t)/t at t=6 within 25% of the decay rate",
                     dev6 <= 0.25,
                     f"median {per_t[6.0]:.4f} vs rate {rate:.4f} (rel dev {dev6:.1%})",
                     "<= 25%"))
    devs = [abs(per_t[t] - rate) for t in (2.0, 4.0, 6.0)]
    rows.append(_row(9, "deviation from the decay rate shrinks across t in {2,4,6}",
                     devs[0] >= devs[1] >= devs[2],
                     ", ".join(f"{d:.3f}" for d in devs), "non-increasing"))
    return rows, battery


def criterion_12(seed: int = SUITE_SEEDS["growth"], replicas: int = 200,
                 battery=None) -> tuple[list[CheckRow], list]:
    rows = []
    if battery is None:
        battery = _growth_battery(seed, replicas)
    good = [snaps for snaps in battery if not snaps[-1].truncated]
    rows.append(_row(12, "non-truncated replicas >= 50", len(good) >= 50,
                     str(len(good)), ">= 50"))
    for g in (0.0, 1.0):
        target = analytics.delta_gamma(LOW_RHO, g).value
        vals = []
        for snaps in good:
            n = count_region(snaps[-1], g)
            vals.append(math.log(n) / 6.0 if n > 0 else -math.inf)
        med = float(np.median(vals))
        rows.append(_row(12, f"median log N_6(gamma={g:g})/6 within +-0.25 of delta",
                         abs(med - target) <= 0.25,
                         f"median {med:.3f} vs delta {target:.3f}",
                         "+-0.25",
                         "typical-path deficit at t=6; see ledger" if abs(med - target) > 0.25 else ""))
    c_tilde, _ = analytics.wave_speed(LOW_RHO)
    med_minx = {}
    for j, t in enumerate((2.0, 4.0, 6.0)):
        med_minx[t] = float(np.median([extremes(snaps[j])[0] / t
                                       for snaps in good if len(snaps[j]) > 0]))
    in_band = -c_tilde <= med_minx[6.0] <= -0.75 * c_tilde
    rows.append(_row(12, "median min X/t at t=6 in [-c_tilde, -0.75 c_tilde]",
                     in_band,
                     f"{med_minx[6.0]:.3f}",
                     f"[{-c_tilde:.3f}, {-0.75 * c_tilde:.3f}]",
                     "frontier converges logarithmically; see ledger" if not in_band else ""))
    rows.append(_row(12, "median min X/t decreasing across t in {2,4,6}",
                     med_minx[2.0] > med_minx[4.0] > med_minx[6.0],
                     ", ".join(f"{med_minx[t]:.3f}" for t in (2.0, 4.0, 6.0)),
                     "strictly decreasing"))
    g_neg, k_neg = 2.0, 2.0
    d = analytics.delta_gamma_kappa(LOW_RHO, g_neg, k_neg).value
    zero_frac = float(np.mean([count_region(snaps[-1], g_neg, kappa=k_neg) == 0
                               for snaps in good]))
    rows.append(_row(12, f"delta({g_neg:g},{k_neg:g})={d:.2f}<0: zero count at t=6 in >=95%",
                     zero_frac >= 0.95, f"{zero_frac:.1%}", ">= 95%"))
    return rows, battery


# ---------------------------------------------------------------------------
# criterion 10: birth-death
# ---------------------------------------------------------------------------

def bd_ascent_schedule(t: float = 10.0):
    """Canonical ascent-derived schedule: the climb leg of the
    (gamma=1, kappa=1) journey, whose clock is positive at desk scale."""
    lam = analytics.lambda_bar(P0, 1.0, 1.0)
    tau = paths.tau_of_t(P0, lam, t)
    ab, bb = analytics.optimal_split(P0, 1.0, 1.0)
    spec = paths.AscentSpec(beta=bb, kappa=1.0, t=t)
    asc = paths.optimal_paths(P0, spec, lam, tau)
    return birthdeath.ascent_schedule(P0, asc), asc


def criterion_10(seed: int = SUITE_SEEDS["birthdeath"], replicas: int = 100_000) -> list[CheckRow]:
    rows = []
    tau = 1.5
    dead = birthdeath.outcome_distribution(birthdeath.constant_schedule(0.0, 2.0, tau))
    dev_dead = max(abs(dead.w_tau - 1.0), abs(dead.u_tau - (1.0 - math.exp(-2.0 * tau))),
                   abs(dead.v_tau))
    rows.append(_maxdev_row(10, "pure death: W=1, U=1-e^{-m tau}, V=0", dev_dead, 1e-12))
    birth = birthdeath.outcome_distribution(birthdeath.constant_schedule(2.0, 0.0, tau))
    dev_birth = max(abs(birth.u_tau), abs(birth.v_tau - (1.0 - math.exp(-2.0 * tau))))
    rows.append(_maxdev_row(10, "pure birth: U=0, V=1-e^{-b tau}", dev_birth, 1e-12))

    sched, _ = bd_ascent_schedule(10.0)
    out = birthdeath.outcome_distribution(sched)
    counts = birthdeath.simulate_bd(sched, seed=seed, replicas=replicas)
    kmax = int(counts.max())
    observed = np.bincount(counts, minlength=kmax + 1).astype(float)
    expected = np.array([out.pmf(n) for n in range(kmax + 1)]) * replicas
    expected[-1] += replicas * (1.0 - out.u_tau) * out.v_tau ** kmax  # tail lump
    # merge trailing bins until every expected count is >= 5
    while len(expected) > 2 and expected[-1] < 5.0:
        expected[-2] += expected[-1]
        observed[-2] += observed[-1]
        expected, observed = expected[:-1], observed[:-1]
    chi2 = float(((observed - expected) ** 2 / expected).sum())
    pval = float(stats.chi2.sf(chi2, df=len(expected) - 1))
    rows.append(_row(10, "ascent schedule: empirical pmf vs geometric law (chi^2)",
                     pval > 0.01, f"p={pval:.4f} (chi2={chi2:.1f}, bins={len(expected)})",
                     "p > 0.01"))
    est = from_samples(counts.astype(float), seed=seed)
    rows.append(_row(10, "empirical mean within 3se of e^{-nu(tau)}",
                     est.covers(out.mean),
                     f"{est.estimate:.5f} +- {est.std_error:.5f}",
                     f"{out.mean:.5f} within 3se"))
    return rows


# ---------------------------------------------------------------------------
# criterion 11: spine and importance sampling
# ---------------------------------------------------------------------------

def expected_spine_births(p: ModelParams, lam: float, tau: float, y0: float) -> float:
    """Closed-form changed-measure mean of the spine birth count."""
    mu = analytics.mu_lambda(p, lam)
    e2 = math.exp(2.0 * mu * tau)
    return (p.r / mu) * (p.theta / (2.0 * mu) + y0 * y0) * (e2 - 1.0) \
        - p.r * p.theta * tau / mu + 2.0 * p.rho * tau


def criterion_11(seed: int = SUITE_SEEDS["spine"],
                 n_tau_replicas: int = 10_000,
                 is_replicas: int = 10_000,
                 direct_replicas: int = 20_000,
                 climb_replicas: int = 20_000) -> list[CheckRow]:
    rows = []
    lam = analytics.lambda_bar(P0, 1.0, 1.0)
    tau = 1.0
    cfg = SimConfig(h_max=0.02, c_step=0.02, snapshot_times=(tau,), seed=seed,
                    store_labels=False)
    ns = np.empty(n_tau_replicas)
    for rep in range(n_tau_replicas):
        ns[rep] = spine.run_spine(P0, lam, (0.0, 0.0), tau, cfg, replica=rep,
                                  grow_subtrees=False).n_tau
    est = from_samples(ns, seed=seed)
    target = expected_spine_births(P0, lam, tau, 0.0)
    rows.append(_row(11, "changed-measure mean of n_tau within 3se of closed form",
                     est.covers(target),
                     f"{est.estimate:.3f} +- {est.std_error:.3f}",
                     f"{target:.3f} within 3se"))

    # IS vs direct estimate of a mild event: some particle above type 2 at tau
    tau_ev = 0.5
    level = 2.0
    cfg_dir = SimConfig(h_max=0.05, c_step=0.01, snapshot_times=(tau_ev,),
                        seed=seed + 1, store_labels=False)
    hits = np.empty(direct_replicas)
    for rep in range(direct_replicas):
        snap = run(P0, (0.0, 0.0), cfg_dir, replica=rep)[0]
        hits[rep] = 1.0 if len(snap) and float(snap.ys.max()) >= level else 0.0
    direct = from_samples(hits, seed=seed + 1)
    cfg_is = SimConfig(h_max=0.05, c_step=0.01, cap=200_000,
                       snapshot_times=(tau_ev,), seed=seed + 2, store_labels=False)
    event = lambda r: len(r.snapshot) > 0 and float(r.snapshot.ys.max()) >= level
    imp = spine.importance_estimate(P0, -0.3, event, tau_ev, (0.0, 0.0),
                                    is_replicas, seed + 2, cfg=cfg_is)
    rows.append(_row(11, "IS vs direct probability of {max Y(0.5) >= 2} overlap at 3 sigma",
                     imp.result.overlaps(direct),
                     f"IS {imp.result.estimate:.5f}+-{imp.result.std_error:.5f} vs "
                     f"direct {direct.estimate:.5f}+-{direct.std_error:.5f}",
                     "3 sigma intervals intersect",
                     f"discarded {imp.result.discarded}"))

    # short-climb family at (beta, kappa) = (1, 1) over t in {4, 9, 16}
    theta_target, _ = analytics.theta_cost(P0, 1.0, 1.0)
    ts = (4.0, 9.0, 16.0)
    exps = []
    for j, t in enumerate(ts):
        spec = ShortClimbSpec(epsilon=0.25, delta=0.25, t=t, beta=1.0, kappa=1.0)
        res = short_climb_probability(P0, spec, replicas=climb_replicas,
                                      seed=seed + 3 + j)
        p_hat = res.result.estimate
        e_t = -math.log(p_hat) / t if p_hat > 0.0 else math.inf
        exps.append(e_t)
        note = "degenerate clock tau(t)=0" if "degenerate_tau" in res.result.flags else \
            f"hits {res.hits}/{res.result.replicas}"
        rows.append(_row(11, f"short-climb exponent at t={t:g}", None,
                         f"P^={p_hat:.3e}, -log/t={e_t:.4f}",
                         f"target {theta_target:.4f} in the t->inf limit", note))
    nondecr = all(exps[i + 1] >= exps[i] - 1e-12 for i in range(len(exps) - 1))
    rows.append(_row(11, "short-climb per-t exponent nondecreasing in t",
                     nondecr, ", ".join(f"{e:.4f}" for e in exps), "nondecreasing"))
    tarr = np.asarray(ts)
    yarr = np.asarray([e * t for e, t in zip(exps, ts)])
    slope = float(np.polyfit(tarr, yarr, 1)[0])
    dev = abs(slope - theta_target) / theta_target
    rows.append(_row(11, "fitted slope of -log P^ against t within 30% of the ascent cost",
                     dev <= 0.30,
                     f"slope {slope:.4f} vs {theta_target:.4f} (rel dev {dev:.1%})",
                     "<= 30%",
                     "clock is zero for t in {4,9} at these constants; see ledger"))
    return rows


# ---------------------------------------------------------------------------
# suite runner
# ---------------------------------------------------------------------------

SUITES = {
    "closed-form": (1, 2, 3),
    "paths": (4, 5),
    "oracle": (6, 7),
    "martingale": (9, 8),  # 9 first so 8 reuses its battery
    "birthdeath": (10,),
    "spine": (11,),
    "growth": (12,),
}
# shared-battery-friendly execution order; the report is sorted by criterion
SUITES["all"] = (1, 2, 3, 4, 5, 6, 7, 9, 12, 8, 10, 11)

#: Criteria whose full-size batteries are expensive; the scale factor
#: below 1.0 marks a run as underpowered but still executes it.
_REPLICA_ARGS = {
    6: "replicas", 7: "replicas", 10: "replicas",
}


def run_suite(name: str, seed: int | None = None, scale: float = 1.0) -> SuiteReport:
    """Run one named suite; scale < 1 shrinks replica counts (flagged)."""
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    report = SuiteReport(suite=name)
    shared: dict[str, object] = {}
    with Stopwatch() as sw:
        done = set()
        for crit in SUITES[name]:
            if crit in done:
                continue
            done.add(crit)
            rows = _run_criterion(crit, seed, scale, shared)
            report.rows.extend(rows)
    report.rows.sort(key=lambda r: r.criterion)
    report.wall_time_s = sw.elapsed
    if scale < 1.0:
        report.rows.append(CheckRow(0, "replica scale", None,
                                    f"scale={scale:g}", "underpowered run", ""))
    return report


def _scaled(n: int, scale: float) -> int:
    return max(10, int(round(n * scale)))


def _run_criterion(crit: int, seed, scale, shared) -> list[CheckRow]:
    if crit == 1:
        return criterion_1(**({} if seed is None else {"seed": seed}))
    if crit == 2:
        return criterion_2(**({} if seed is None else {"seed": seed}))
    if crit == 3:
        return criterion_3(**({} if seed is None else {"seed": seed}))
    if crit == 4:
        return criterion_4(**({} if seed is None else {"seed": seed}))
    if crit == 5:
        return criterion_5(**({} if seed is None else {"seed": seed}))
    if crit == 6:
        kw = {"replicas": _scaled(10_000, scale)}
        if seed is not None:
            kw["seed"] = seed
        return criterion_6(**kw)
    if crit == 7:
        kw = {"replicas": _scaled(10_000, scale)}
        if seed is not None:
            kw["seed"] = seed
        rows, battery = criterion_7(**kw)
        shared["p0_battery"] = battery
        return rows
    if crit == 8:
        kw = {}
        if seed is not None:
            kw["seed"] = seed
        if "p0_battery" in shared:
            kw["battery"] = shared["p0_battery"]
        else:
            kw["replicas"] = _scaled(10_000, scale)
        kw["growth_battery"] = shared.get("growth_battery")
        return criterion_8(**kw)
    if crit == 9:
        kw = {"replicas": _scaled(200, scale)}
        if seed is not None:
            kw["seed"] = seed
        if "growth_battery" in shared:
            kw["battery"] = shared["growth_battery"]
        rows, battery = criterion_9(**kw)
        shared["growth_battery"] = battery
        return rows
    if crit == 10:
        kw = {"replicas": _scaled(100_000, scale)}
        if seed is not None:
            kw["seed"] = seed
        return criterion_10(**kw)
    if crit == 11:
        kw = {
            "n_tau_replicas": _scaled(10_000, scale),
            "is_replicas": _scaled(10_000, scale),
            "direct_replicas": _scaled(20_000, scale),
            "climb_replicas": _scaled(20_000, scale),
        }
        if seed is not None:
            kw["seed"] = seed
        return criterion_11(**kw)
    if crit == 12:
        kw = {"replicas": _scaled(200, scale)}
        if seed is not None:
            kw["seed"] = seed
        if "growth_battery" in shared:
            kw["battery"] = shared["growth_battery"]
        rows, battery = criterion_12(**kw)
        shared["growth_battery"] = battery
        return rows
    raise ValueError(f"unknown criterion {crit}")
