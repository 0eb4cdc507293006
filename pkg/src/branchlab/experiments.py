"""Experiment orchestration: batteries, CSV emission, manifests.

Every run is reproducible from its manifest alone: the manifest records
the flat effective configuration, the seed, package/runtime versions and
wall time.  CSV output is comma-separated with a header row, '.' decimal
separator, 17 significant digits, and the literal token -inf for the
minus-infinity growth-rate sentinel.

Replicas are embarrassingly parallel; a bounded process pool is used
when the worker count (BRANCHLAB_WORKERS or the workers argument) is
above one.  Results are identical for any worker count because every
replica's randomness is keyed by (seed, replica, label).
"""

from __future__ import annotations

import json
import math
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import scipy

from . import __version__
from .analytics import (
    delta_gamma_kappa,
    growth_rate_D,
    lambda_bar,
    lambda_bar_ascent,
)
from .martingale import series_from_snapshots
from .params import ModelParams
from .paths import AscentSpec, NoBracket, lambda_hat, optimal_paths, tau_of_t
from .simulator import PopulationSnapshot, SimConfig, run
from .spine import SpineRun, run_spine


def fmt(x) -> str:
    """CSV number format: 17 significant digits, -inf as a literal token."""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    xf = float(x)
    if math.isinf(xf):
        return "-inf" if xf < 0 else "inf"
    return f"{xf:.17g}"


def csv_table(header: list[str], rows: list[list]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def manifest(config: dict, seed: int, wall_time_s: float, **extra) -> dict:
    return {
        "config": {k: config[k] for k in sorted(config)},
        "seed": int(seed),
        "versions": {
            "branchlab": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "wall_time_s": wall_time_s,
        **extra,
    }


def default_workers() -> int:
    env = os.environ.get("BRANCHLAB_WORKERS")
    if env:
        return max(1, int(env))
    return 1


# ---------------------------------------------------------------------------
# rates table
# ---------------------------------------------------------------------------

def rates_table(p: ModelParams, gammas: list[float], kappas: list[float]) -> str:
    """CSV of (gamma, kappa, delta, lambda_bar, D) over the grid."""
    rows = []
    for g in gammas:
        for k in kappas:
            res = delta_gamma_kappa(p, g, k)
            d = growth_rate_D(p, g, k)
            rows.append([g, k, res.value, res.argmin_lambda, d.as_csv()])
    return csv_table(["gamma", "kappa", "delta", "lambda_bar", "D"], rows)


# ---------------------------------------------------------------------------
# path sampling
# ---------------------------------------------------------------------------

def path_table(p: ModelParams, beta: float, kappa: float, t: float,
               tau: float | None = None, n_samples: int = 257) -> tuple[str, dict]:
    """CSV of (s, y, x) along the ascent pair; info carries the lam used.

    tau defaults to the ascent clock at lambda_bar_ascent(beta, kappa).
    The finite-horizon optimizer is used when its defining equation has a
    root; otherwise the infinite-horizon lam with a note in the info.
    """
    lam_inf = lambda_bar_ascent(p, beta, kappa)
    if tau is None:
        tau = tau_of_t(p, lam_inf, t)
    if tau <= 0.0:
        return csv_table(["s", "y", "x"], []), {
            "tau": 0.0, "lambda": lam_inf, "note": "degenerate clock (tau=0)",
        }
    spec = AscentSpec(beta=beta, kappa=kappa, t=t)
    try:
        lam = lambda_hat(p, spec, tau)
        note = "finite-horizon optimizer"
    except NoBracket:
        lam = lam_inf
        note = "no finite-horizon root; infinite-horizon optimizer used"
    asc = optimal_paths(p, spec, lam, tau)
    rows = []
    for s in np.linspace(0.0, tau, n_samples):
        rows.append([float(s), asc.y_path(float(s))[0], asc.x_path(float(s))[0]])
    info = {"tau": tau, "lambda": lam, "cost_per_t": asc.cost, "note": note}
    return csv_table(["s", "y", "x"], rows), info


# ---------------------------------------------------------------------------
# simulation batteries
# ---------------------------------------------------------------------------

def _one_replica(args) -> list[PopulationSnapshot]:
    p, start, cfg, rep = args
    return run(p, start, cfg, replica=rep)


def run_replicas(p: ModelParams, start: tuple[float, float], cfg: SimConfig,
                 replicas: int, workers: int | None = None) -> list[list[PopulationSnapshot]]:
    """Simulate `replicas` independent trees; replica r uses stream (seed, r)."""
    if workers is None:
        workers = default_workers()
    args = [(p, start, cfg, rep) for rep in range(replicas)]
    if workers <= 1:
        return [_one_replica(a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_one_replica, args, chunksize=max(1, replicas // (8 * workers))))


def snapshots_csv(batches: list[list[PopulationSnapshot]]) -> str:
    """CSV of (replica, time, label, x, y); label '-' when not stored."""
    rows = []
    for rep, snaps in enumerate(batches):
        for snap in snaps:
            if snap.labels is not None:
                for lab, x, y in zip(snap.labels, snap.xs, snap.ys):
                    rows.append([rep, snap.time, "0" + "".join(map(str, lab)), x, y])
            else:
                for x, y in zip(snap.xs, snap.ys):
                    rows.append([rep, snap.time, "-", x, y])
    return csv_table(["replica", "time", "label", "x", "y"], rows)


def martingale_csv(batches: list[list[PopulationSnapshot]], p: ModelParams,
                   lams: list[float], signs: list[str]) -> str:
    """CSV of (replica, time, lambda, sign, log_value) over non-empty snapshots."""
    rows = []
    for rep, snaps in enumerate(batches):
        usable = [s for s in snaps if len(s) > 0]
        for lam in lams:
            for sign in signs:
                series = series_from_snapshots(usable, p, lam, sign)
                for t, v in series.samples:
                    rows.append([rep, t, lam, sign, v])
    return csv_table(["replica", "time", "lambda", "sign", "log_value"], rows)


def spine_trace_csv(runs: list[SpineRun]) -> str:
    rows = []
    for rep, r in enumerate(runs):
        for s, xi, eta, is_birth in r.spine_trace:
            rows.append([rep, s, xi, eta, 1 if is_birth else 0])
    return csv_table(["replica", "s", "xi", "eta", "is_birth"], rows)


def spine_battery(p: ModelParams, lam: float, start: tuple[float, float],
                  tau: float, cfg: SimConfig, replicas: int,
                  grow_subtrees: bool = False,
                  record_trace: bool = True) -> list[SpineRun]:
    return [
        run_spine(p, lam, start, tau, cfg, replica=rep,
                  grow_subtrees=grow_subtrees, record_trace=record_trace)
        for rep in range(replicas)
    ]


class Stopwatch:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        return False
