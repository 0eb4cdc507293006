"""FastAPI service wrapping the branchlab core.

Endpoints mirror the CLI subcommands one-to-one; the CLI is a thin HTTP
client.  All handlers are pure functions of the request (no server-side
state, no filesystem writes), so results are reproducible from the
returned manifest alone.
"""

from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__, analytics, birthdeath, oracle, spine, verify
from ..experiments import (
    Stopwatch,
    fmt,
    csv_table,
    manifest as build_manifest,
    martingale_csv,
    path_table,
    rates_table,
    run_replicas,
    snapshots_csv,
    spine_battery,
    spine_trace_csv,
)
from ..funcs import make_xy_function
from ..mc import from_samples
from ..params import ModelParams, ParamError
from ..paths import AscentSpec, DegenerateTau, optimal_paths, tau_of_t
from ..simulator import SimConfig
from ..spine import ShortClimbSpec
from . import schemas as S

app = FastAPI(title="branchlab", version=__version__)


def _params(pin: S.ParamsIn) -> ModelParams:
    try:
        return ModelParams(pin.theta, pin.a, pin.r, pin.rho)
    except ParamError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


def _flat(prefix: str, model) -> dict:
    out = {}
    for key, val in model.model_dump().items():
        name = f"{prefix}.{key}" if prefix else key
        if isinstance(val, dict):
            for k2, v2 in val.items():
                out[f"{name}.{k2}"] = v2
        elif isinstance(val, list):
            out[name] = ",".join(str(v) for v in val)
        elif val is None:
            out[name] = ""
        else:
            out[name] = val
    return out


def _manifest(req_model, seed: int, sw: Stopwatch, **extra) -> S.Manifest:
    m = build_manifest(_flat("", req_model), seed, sw.elapsed, )
    return S.Manifest(config=m["config"], seed=m["seed"], versions=m["versions"],
                      wall_time_s=m["wall_time_s"], extra=extra)


@app.get("/health")
def health():
    return {"status": "ok", "version": __version__}


@app.post("/rates", response_model=S.CsvResponse)
def rates(req: S.RatesRequest):
    p = _params(req.params)
    with Stopwatch() as sw:
        csv = rates_table(p, req.gamma_grid.values(), req.kappa_grid.values())
    return S.CsvResponse(csv=csv, manifest=_manifest(req, 0, sw))


@app.post("/spectral", response_model=S.SpectralResponse)
def spectral_endpoint(req: S.SpectralRequest):
    p = _params(req.params)
    try:
        s = analytics.spectral(p, req.lam)
    except analytics.LambdaOutOfRange as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return S.SpectralResponse(lam=s.lam, mu=s.mu, psi_minus=s.psi_minus,
                              psi_plus=s.psi_plus, e_minus=s.e_minus,
                              e_plus=s.e_plus, c_minus=s.c_minus,
                              c_plus=s.c_plus, lambda_min=p.lambda_min)


@app.post("/paths", response_model=S.PathsResponse)
def paths_endpoint(req: S.PathsRequest):
    p = _params(req.params)
    try:
        with Stopwatch() as sw:
            csv, info = path_table(p, req.beta, req.kappa, req.t, req.tau,
                                   req.n_samples)
    except (DegenerateTau, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return S.PathsResponse(csv=csv, tau=info["tau"], lam=info["lambda"],
                           cost_per_t=info.get("cost_per_t"),
                           note=info.get("note", ""),
                           manifest=_manifest(req, req.seed, sw))


@app.post("/simulate", response_model=S.SimulateResponse)
def simulate(req: S.SimulateRequest):
    p = _params(req.params)
    try:
        cfg = SimConfig(h_max=req.sim.h_max, c_step=req.sim.c_step,
                        cap=req.sim.cap, snapshot_times=tuple(req.snapshot_times),
                        seed=req.seed, store_labels=req.store_labels)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    with Stopwatch() as sw:
        batches = run_replicas(p, (req.start_x, req.start_y), cfg, req.replicas)
        truncated = sum(1 for snaps in batches if snaps[-1].truncated)
        csv = snapshots_csv(batches)
    return S.SimulateResponse(csv=csv, truncated_replicas=truncated,
                              manifest=_manifest(req, req.seed, sw,
                                                 truncated_replicas=truncated))


@app.post("/martingale", response_model=S.CsvResponse)
def martingale_endpoint(req: S.MartingaleRequest):
    p = _params(req.params)
    for lam in req.lams:
        if lam > 0.0 or lam <= p.lambda_min:
            raise HTTPException(status_code=422,
                                detail=f"lam={lam} outside (lambda_min, 0]")
    cfg = SimConfig(h_max=req.sim.h_max, c_step=req.sim.c_step, cap=req.sim.cap,
                    snapshot_times=tuple(req.snapshot_times), seed=req.seed,
                    store_labels=False)
    with Stopwatch() as sw:
        batches = run_replicas(p, (req.start_x, req.start_y), cfg, req.replicas)
        csv = martingale_csv(batches, p, req.lams, list(req.signs))
    return S.CsvResponse(csv=csv, manifest=_manifest(req, req.seed, sw))


@app.post("/spine", response_model=S.SpineResponse)
def spine_endpoint(req: S.SpineRequest):
    p = _params(req.params)
    if not (p.lambda_min < req.lam < 0.0):
        raise HTTPException(status_code=422,
                            detail=f"lam={req.lam} outside (lambda_min, 0)")
    cfg = SimConfig(h_max=req.sim.h_max, c_step=req.sim.c_step, cap=req.sim.cap,
                    snapshot_times=(req.tau,), seed=req.seed, store_labels=False,
                    grid_dt=req.tau / 64.0)
    with Stopwatch() as sw:
        runs = spine_battery(p, req.lam, (req.start_x, req.start_y), req.tau,
                             cfg, req.replicas, grow_subtrees=req.grow_subtrees,
                             record_trace=True)
        csv = spine_trace_csv(runs)
        est = from_samples([r.n_tau for r in runs], seed=req.seed)
    expected = verify.expected_spine_births(p, req.lam, req.tau, req.start_y)
    return S.SpineResponse(csv=csv, n_tau_mean=est.estimate,
                           n_tau_std_error=est.std_error,
                           expected_n_tau=expected,
                           manifest=_manifest(req, req.seed, sw))


@app.post("/importance", response_model=S.ImportanceResponse)
def importance(req: S.ImportanceRequest):
    p = _params(req.params)
    with Stopwatch() as sw:
        if req.event == "short_climb":
            spec = ShortClimbSpec(epsilon=req.epsilon, delta=req.delta,
                                  t=req.t, beta=req.beta, kappa=req.kappa)
            res = spine.short_climb_probability(p, spec, req.replicas, req.seed)
            lam, tau = spec.lambda_ascent(p), spec.tau(p)
        else:
            if not (p.lambda_min < req.lam < 0.0):
                raise HTTPException(status_code=422,
                                    detail=f"lam={req.lam} outside (lambda_min, 0)")
            cfg = SimConfig(h_max=req.sim.h_max, c_step=req.sim.c_step,
                            cap=req.sim.cap, snapshot_times=(req.tau,),
                            seed=req.seed, store_labels=False)
            if req.event == "always":
                event = lambda r: True
            else:
                level = req.level
                event = lambda r: len(r.snapshot) > 0 and float(r.snapshot.ys.max()) >= level
            res = spine.importance_estimate(p, req.lam, event, req.tau,
                                            (req.start_x, req.start_y),
                                            req.replicas, req.seed, cfg=cfg)
            lam, tau = req.lam, req.tau
    r = res.result
    out = S.EstimateOut(estimate=r.estimate, std_error=r.std_error,
                        replicas=r.replicas, seed=r.seed, discarded=r.discarded,
                        flags=list(r.flags))
    return S.ImportanceResponse(result=out, log_weight_min=res.log_weight_min,
                                log_weight_median=res.log_weight_median,
                                log_weight_max=res.log_weight_max, hits=res.hits,
                                lam=lam, tau=tau,
                                manifest=_manifest(req, req.seed, sw,
                                                   discarded=r.discarded))


@app.post("/birthdeath", response_model=S.BirthDeathResponse)
def birthdeath_endpoint(req: S.BirthDeathRequest):
    p = _params(req.params)
    with Stopwatch() as sw:
        if req.schedule == "constant":
            sched = birthdeath.constant_schedule(req.birth, req.death, req.horizon)
        else:
            lam = analytics.lambda_bar(p, req.gamma, req.kappa)
            tau = tau_of_t(p, lam, req.t)
            if tau <= 0.0:
                raise HTTPException(status_code=422,
                                    detail=f"ascent clock is 0 at t={req.t}")
            ab, bb = analytics.optimal_split(p, req.gamma, req.kappa)
            asc = optimal_paths(p, AscentSpec(beta=bb, kappa=req.kappa, t=req.t),
                                lam, tau)
            sched = birthdeath.ascent_schedule(p, asc)
        out = birthdeath.outcome_distribution(sched)
        exact, approx, k_tau, applicable = birthdeath.survival_approximation(sched)
        emp_mean = None
        emp_pmf = None
        if req.replicas > 0:
            counts = birthdeath.simulate_bd(sched, seed=req.seed,
                                            replicas=req.replicas)
            emp_mean = float(counts.mean())
            binc = np.bincount(counts, minlength=req.n_max + 1)
            emp_pmf = (binc[: req.n_max + 1] / req.replicas).tolist()
    return S.BirthDeathResponse(
        w=out.w_tau, u=out.u_tau, v=out.v_tau, mean=out.mean,
        pmf=[out.pmf(n) for n in range(req.n_max + 1)],
        survival_exact=exact, survival_approx=approx,
        k_tau=k_tau if math.isfinite(k_tau) else -1.0,
        approx_applicable=applicable,
        empirical_mean=emp_mean, empirical_pmf=emp_pmf,
        manifest=_manifest(req, req.seed, sw))


@app.post("/oracle", response_model=S.OracleResponse)
def oracle_endpoint(req: S.OracleRequest):
    p = _params(req.params)
    closed = None
    with Stopwatch() as sw:
        if req.estimator == "population":
            closed = oracle.expected_population(p, req.t, req.start_y)
            out = S.EstimateOut(estimate=closed, std_error=0.0, replicas=0,
                                seed=req.seed)
        else:
            f = make_xy_function(req.f)
            start = (req.start_x, req.start_y)
            if req.estimator == "many_to_one":
                r = oracle.many_to_one_expectation(p, f, req.t, start,
                                                   req.replicas, req.seed)
            else:
                if not (p.lambda_min < req.lam < 0.0):
                    raise HTTPException(status_code=422,
                                        detail=f"lam={req.lam} outside (lambda_min, 0)")
                r = oracle.transformed_expectation(p, req.lam, f, req.t, start,
                                                   req.replicas, req.seed)
            if req.f == "one":
                closed = oracle.expected_population(p, req.t, req.start_y)
            out = S.EstimateOut(estimate=r.estimate, std_error=r.std_error,
                                replicas=r.replicas, seed=r.seed,
                                discarded=r.discarded, flags=list(r.flags))
    return S.OracleResponse(result=out, closed_form=closed,
                            manifest=_manifest(req, req.seed, sw))


@app.post("/verify", response_model=S.VerifyResponse)
def verify_endpoint(req: S.VerifyRequest):
    report = verify.run_suite(req.suite, seed=req.seed, scale=req.scale)
    rows = [S.CheckRowOut(criterion=r.criterion, name=r.name, passed=r.passed,
                          measured=r.measured, threshold=r.threshold, note=r.note)
            for r in report.rows]
    csv = csv_table(
        ["criterion", "name", "status", "measured", "threshold", "note"],
        [[r.criterion, r.name.replace(",", ";"),
          {True: "pass", False: "fail", None: "note"}[r.passed],
          r.measured.replace(",", ";"), r.threshold.replace(",", ";"),
          r.note.replace(",", ";")] for r in report.rows],
    )
    return S.VerifyResponse(suite=report.suite, passed=report.passed, rows=rows,
                            wall_time_s=report.wall_time_s, report_csv=csv)
