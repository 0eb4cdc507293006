"""Forward Monte Carlo of the branching diffusion under the original law.

Dynamics per particle: the type is advanced by its exact Ornstein-
Uhlenbeck transition (mean y*e^{-theta h/2}, variance 1 - e^{-theta h});
the spatial move is a centered Gaussian whose variance is the trapezoid
approximation of the accumulated a*y^2; binary branching within a step is
resolved at the step end with probability 1 - exp(-h*(rho + r*(y^2+y'^2)/2)).
The adaptive step h = min(h_max, c_step/R(y)) keeps the per-step branch
probability at most c_step, so the only discretization bias, the O(h^2)-
weak misplacement of branch times, is controlled uniformly in the type.

Offspring copy the parent's exact state at the step end and receive
private random streams keyed by their genealogy labels, which makes every
run bit-reproducible regardless of traversal order or worker count.
Truncated runs (population cap reached) are flagged so statistics can
exclude them.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import rng as rngmod
from .mc import EstimatorResult, from_samples
from .params import ModelParams
from .rng import BlockDraws, Label


class StepTooLarge(ValueError):
    """Step violates the h_max / c_step adaptive contract."""


class CapExceeded(RuntimeError):
    """Live population exceeded the configured cap."""


class ModeConflict(ValueError):
    """count_region called with both a kappa threshold and a type window."""


class EmptyPopulation(ValueError):
    pass


class RangeViolation(ValueError):
    """A product-functional argument left [0, 1]."""


@dataclass(frozen=True)
class Particle:
    label: Label
    x: float
    y: float
    born_at: float

    @property
    def label_text(self) -> str:
        return rngmod.label_str(self.label)


@dataclass
class PopulationSnapshot:
    """Particles alive at one time point (arrays; labels optional)."""

    time: float
    xs: np.ndarray
    ys: np.ndarray
    labels: tuple[Label, ...] | None = None
    born: np.ndarray | None = None
    in_tube: np.ndarray | None = None
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.xs)

    @property
    def particles(self) -> list[Particle]:
        if self.labels is None:
            raise ValueError("labels were not stored for this run")
        born = self.born if self.born is not None else np.zeros(len(self.xs))
        return [
            Particle(lab, float(x), float(y), float(b))
            for lab, x, y, b in zip(self.labels, self.xs, self.ys, born)
        ]


@dataclass(frozen=True)
class SimConfig:
    """Simulation knobs; h_max and c_step bound the per-step bias."""

    h_max: float = 0.1
    c_step: float = 0.05
    cap: int = 200_000
    snapshot_times: tuple[float, ...] = (1.0,)
    seed: int = 0
    store_labels: bool = True
    grid_dt: float | None = None  # extra path-checking grid (tube events)

    def __post_init__(self):
        if not (0.0 < self.h_max <= 0.5):
            raise ValueError(f"need 0 < h_max <= 0.5, got {self.h_max}")
        if not (0.0 < self.c_step <= 0.2):
            raise ValueError(f"need 0 < c_step <= 0.2, got {self.c_step}")
        if self.cap < 1:
            raise ValueError(f"need cap >= 1, got {self.cap}")
        if not self.snapshot_times:
            raise ValueError("need at least one snapshot time")
        if any(t < 0.0 for t in self.snapshot_times):
            raise ValueError("snapshot times must be >= 0")

    @property
    def horizon(self) -> float:
        return max(self.snapshot_times)


def step_kernel(p: ModelParams, x: float, y: float, h: float,
                gauss_y: float, gauss_x: float, unif: float) -> tuple[float, float, bool]:
    """One adaptive step as a pure function of the supplied randoms."""
    ey = math.exp(-0.5 * p.theta * h)
    y2 = y * ey + math.sqrt(1.0 - ey * ey) * gauss_y
    var = 0.5 * p.a * h * (y * y + y2 * y2)
    x2 = x + math.sqrt(var) * gauss_x if var > 0.0 else x
    rate = p.rho + 0.5 * p.r * (y * y + y2 * y2)
    branched = unif < -math.expm1(-h * rate)
    return x2, y2, branched


def advance_particle(p: ModelParams, state: tuple[float, float], h: float,
                     rng: np.random.Generator, h_max: float = 0.5,
                     c_step: float = 0.2) -> tuple[float, float, bool]:
    """Advance one particle by a step h honoring the adaptive contract.

    Raises StepTooLarge if h exceeds h_max or h*R(y) exceeds c_step.
    """
    x, y = state
    if h < 0.0:
        raise StepTooLarge(f"h must be >= 0, got {h}")
    if h == 0.0:
        return x, y, False
    if h > h_max or h * p.branch_rate(y) > c_step * (1.0 + 1e-12):
        raise StepTooLarge(
            f"h={h} violates h_max={h_max} or c_step={c_step} at y={y}"
        )
    return step_kernel(p, x, y, h, rng.standard_normal(), rng.standard_normal(), rng.random())


@dataclass
class _Task:
    label: Label
    x: float
    y: float
    born: float
    bidx: int  # index of the first time boundary strictly ahead
    in_tube: bool = True


class Engine:
    """Lineage-at-a-time simulation over a fixed boundary grid.

    Boundaries are the snapshot times plus (optionally) a uniform
    path-checking grid; steps are clipped so boundary states are exact.
    The spine runner reuses this engine to grow off-line subtrees into
    the same snapshot buckets.
    """

    def __init__(self, p: ModelParams, cfg: SimConfig, replica: int,
                 tube: Callable[[float, float, float], bool] | None = None):
        self.p = p
        self.cfg = cfg
        self.replica = replica
        self.tube = tube

        snap_times = tuple(sorted(set(float(t) for t in cfg.snapshot_times)))
        bset = {t for t in snap_times if t > 0.0}
        if cfg.grid_dt is not None:
            n = int(math.ceil(self.cfg.horizon / cfg.grid_dt - 1e-9))
            bset.update(min(k * cfg.grid_dt, self.cfg.horizon) for k in range(1, n + 1))
        self.b_times: list[float] = sorted(bset)
        snap_index = {t: i for i, t in enumerate(snap_times)}
        self.b_snap: list[int] = [snap_index.get(t, -1) for t in self.b_times]
        self.snap_times = snap_times
        self._snap_lookup = snap_index
        self.buckets: list[list] = [[] for _ in snap_times]
        self.branches = 0
        self.truncated = False
        self.queue: list[_Task] = []
        self._qi = 0

    def boundary_index(self, t: float) -> int:
        return bisect.bisect_right(self.b_times, t)

    def add_root(self, label: Label, x: float, y: float, born: float,
                 in_tube: bool = True):
        task = _Task(label, x, y, born, self.boundary_index(born), in_tube)
        si = self._snap_lookup.get(born)
        if si is not None:
            self.buckets[si].append((label, x, y, born, in_tube))
        self.queue.append(task)

    def drain(self):
        """Process queued lineages (FIFO) until exhausted or truncated."""
        if self.truncated:
            return
        p, cfg = self.p, self.cfg
        theta, a, r, rho = p.theta, p.a, p.r, p.rho
        h_max, c_step, cap = cfg.h_max, cfg.c_step, cfg.cap
        b_times, b_snap, buckets = self.b_times, self.b_snap, self.buckets
        nb_total = len(b_times)
        tube = self.tube
        exp, expm1, sqrt = math.exp, math.expm1, math.sqrt

        while self._qi < len(self.queue):
            task = self.queue[self._qi]
            self._qi += 1
            label, x, y, t, i, in_tube = (task.label, task.x, task.y,
                                          task.born, task.bidx, task.in_tube)
            draws = BlockDraws(rngmod.stream(cfg.seed, self.replica, label))
            normal, uniform = draws.normal, draws.uniform
            while i < nb_total:
                rate0 = rho + r * y * y
                h_adapt = h_max if rate0 <= 0.0 else min(h_max, c_step / rate0)
                nb = b_times[i]
                hit = nb - t <= h_adapt
                h = nb - t if hit else h_adapt

                ey = exp(-0.5 * theta * h)
                y2 = y * ey + sqrt(1.0 - ey * ey) * normal()
                var = 0.5 * a * h * (y * y + y2 * y2)
                x2 = x + sqrt(var) * normal() if var > 0.0 else x
                pb = -expm1(-h * (rho + 0.5 * r * (y * y + y2 * y2)))
                branched = uniform() < pb

                x, y = x2, y2
                if hit:
                    t = nb
                    if tube is not None and in_tube:
                        in_tube = tube(t, x, y)
                    si = b_snap[i]
                    if si >= 0:
                        if branched:
                            buckets[si].append((label + (1,), x, y, t, in_tube))
                            buckets[si].append((label + (2,), x, y, t, in_tube))
                        else:
                            buckets[si].append((label, x, y, t, in_tube))
                    i += 1
                else:
                    t += h

                if branched:
                    self.branches += 1
                    if 1 + self.branches > cap:
                        self.truncated = True
                        return
                    ci = i
                    self.queue.append(_Task(label + (1,), x, y, t, ci, in_tube))
                    self.queue.append(_Task(label + (2,), x, y, t, ci, in_tube))
                    break

    def snapshots(self) -> list[PopulationSnapshot]:
        out = []
        store = self.cfg.store_labels
        for tm, rows in zip(self.snap_times, self.buckets):
            rows = sorted(rows, key=lambda r: r[0])
            xs = np.asarray([r[1] for r in rows], dtype=float)
            ys = np.asarray([r[2] for r in rows], dtype=float)
            labels = tuple(r[0] for r in rows) if store else None
            born = np.asarray([r[3] for r in rows], dtype=float) if store else None
            tube_flags = (np.asarray([r[4] for r in rows], dtype=bool)
                          if self.tube is not None else None)
            out.append(PopulationSnapshot(time=tm, xs=xs, ys=ys, labels=labels,
                                          born=born, in_tube=tube_flags,
                                          truncated=self.truncated))
        return out


def run(p: ModelParams, start: tuple[float, float], cfg: SimConfig,
        replica: int = 0) -> list[PopulationSnapshot]:
    """Simulate one tree from `start`; one snapshot per requested time."""
    engine = Engine(p, cfg, replica)
    engine.add_root(rngmod.ROOT, float(start[0]), float(start[1]), 0.0)
    engine.drain()
    return engine.snapshots()


def count_region(snap: PopulationSnapshot, gamma: float,
                 kappa: float | None = None,
                 type_window: tuple[float, float] | None = None) -> int:
    """Number of particles with x <= -gamma*t and type in the given region.

    Exactly one of `kappa` (counts y >= kappa*sqrt(t)) and `type_window`
    (counts y in [lo, hi]) may be given; with neither, all types count.
    """
    if kappa is not None and type_window is not None:
        raise ModeConflict("kappa and type_window are mutually exclusive")
    t = snap.time
    sel = snap.xs <= -gamma * t
    if kappa is not None:
        sel &= snap.ys >= kappa * math.sqrt(t)
    elif type_window is not None:
        lo, hi = type_window
        sel &= (snap.ys >= lo) & (snap.ys <= hi)
    return int(np.count_nonzero(sel))


def extremes(snap: PopulationSnapshot) -> tuple[float, float, float]:
    """(min x, max x, max |y|) over the live particles."""
    if len(snap) == 0:
        raise EmptyPopulation(f"no particles at t={snap.time}")
    return (float(snap.xs.min()), float(snap.xs.max()),
            float(np.abs(snap.ys).max()))


def mckean_product(p: ModelParams, f: Callable[[float, float], float], t: float,
                   start: tuple[float, float], replicas: int, seed: int,
                   cfg: SimConfig | None = None) -> EstimatorResult:
    """Monte Carlo mean of prod_u f(X_u(t), Y_u(t)), f mapping into [0, 1].

    Estimates the product-form solution of the associated reaction-
    diffusion equation at (t, start).
    """
    if cfg is None:
        cfg = SimConfig(h_max=0.05, c_step=0.02, snapshot_times=(t,), seed=seed,
                        store_labels=False)
    else:
        cfg = SimConfig(h_max=cfg.h_max, c_step=cfg.c_step, cap=cfg.cap,
                        snapshot_times=(t,), seed=seed, store_labels=False)
    vals = np.empty(replicas)
    discarded = 0
    for rep in range(replicas):
        snap = run(p, start, cfg, replica=rep)[0]
        if snap.truncated:
            discarded += 1
            vals[rep] = np.nan
            continue
        prod = 1.0
        for xu, yu in zip(snap.xs, snap.ys):
            fv = f(float(xu), float(yu))
            if fv < 0.0 or fv > 1.0:
                raise RangeViolation(f"f({xu}, {yu}) = {fv} outside [0, 1]")
            prod *= fv
        vals[rep] = prod
    good = vals[~np.isnan(vals)]
    flags = ("discarded_replicas",) if discarded else ()
    return from_samples(good, seed=seed, discarded=discarded, flags=flags)


def population_sizes(snapshots_by_replica: Sequence[Sequence[PopulationSnapshot]],
                     snap_index: int = 0) -> np.ndarray:
    """Convenience: population size per replica at one snapshot index."""
    return np.asarray(
        [len(snaps[snap_index]) for snaps in snapshots_by_replica], dtype=float
    )
