"""Pydantic request/response models for the branchlab service."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field


class ParamsIn(BaseModel):
    theta: float = 10.0
    a: float = 1.0
    r: float = 1.0
    rho: float = 1.0


class Manifest(BaseModel):
    config: dict[str, str | float | int | bool]
    seed: int
    versions: dict[str, str]
    wall_time_s: float
    extra: dict[str, float | int | str] = Field(default_factory=dict)


class GridSpec(BaseModel):
    """Inclusive start:stop:step grid."""

    start: float
    stop: float
    step: float

    def values(self) -> list[float]:
        if self.step <= 0.0:
            raise ValueError("grid step must be > 0")
        out = []
        v = self.start
        while v <= self.stop + 1e-12:
            out.append(round(v, 12))
            v += self.step
        return out


class RatesRequest(BaseModel):
    params: ParamsIn = ParamsIn()
    gamma_grid: GridSpec = GridSpec(start=0.0, stop=4.0, step=0.5)
    kappa_grid: GridSpec = GridSpec(start=0.0, stop=2.0, step=0.5)


class CsvResponse(BaseModel):
    csv: str
    manifest: Manifest


class SpectralRequest(BaseModel):
    params: ParamsIn = ParamsIn()
    lam: float


class SpectralResponse(BaseModel):
    lam: float
    mu: float
    psi_minus: float
    psi_plus: float
    e_minus: float
    e_plus: float
    c_minus: float | None
    c_plus: float | None
    lambda_min: float


class PathsRequest(BaseModel):
    params: ParamsIn = ParamsIn()
    beta: float = 1.0
    kappa: float = 1.0
    t: float = 100.0
    tau: float | None = None
    n_samples: int = Field(257, ge=3, le=100_001)
    seed: int = 0


class PathsResponse(BaseModel):
    csv: str
    tau: float
    lam: float
    cost_per_t: float | None = None
    note: str = ""
    manifest: Manifest


class SimKnobs(BaseModel):
    h_max: float = Field(0.05, gt=0.0, le=0.5)
    c_step: float = Field(0.02, gt=0.0, le=0.2)
    cap: int = Field(200_000, ge=1)


class SimulateRequest(BaseModel):
    params: ParamsIn = ParamsIn()
    start_x: float = 0.0
    start_y: float = 0.0
    snapshot_times: list[float] = [1.0]
    replicas: int = Field(10, ge=1, le=1_000_000)
    seed: int = 0
    sim: SimKnobs = SimKnobs()
    store_labels: bool = True


class SimulateResponse(BaseModel):
    csv: str
    truncated_replicas: int
    manifest: Manifest


class MartingaleRequest(BaseModel):
    params: ParamsIn = ParamsIn()
    lams: list[float] = [-0.3]
    signs: list[Literal["plus", "minus"]] = ["minus", "plus"]
    snapshot_times: list[float] = [0.5, 1.0]
    start_x: float = 0.0
    start_y: float = 0.0
    replicas: int = Field(100, ge=1, le=1_000_000)
    seed: int = 0
    sim: SimKnobs = SimKnobs()


class SpineRequest(BaseModel):
    params: ParamsIn = ParamsIn()
    lam: float = -0.35245368842512068
    tau: float = 1.0
    start_x: float = 0.0
    start_y: float = 0.0
    replicas: int = Field(100, ge=1, le=1_000_000)
    seed: int = 0
    sim: SimKnobs = SimKnobs(h_max=0.02, c_step=0.02)
    grow_subtrees: bool = False


class SpineResponse(BaseModel):
    csv: str
    n_tau_mean: float
    n_tau_std_error: float
    expected_n_tau: float
    manifest: Manifest


class EstimateOut(BaseModel):
    estimate: float
    std_error: float
    replicas: int
    seed: int
    discarded: int = 0
    flags: list[str] = []


class ImportanceRequest(BaseModel):
    params: ParamsIn = ParamsIn()
    lam: float = -0.3
    tau: float = 0.5
    event: Literal["always", "type_exceeds", "short_climb"] = "type_exceeds"
    level: float = 2.0  # for type_exceeds
    # short-climb spec (used when event == 'short_climb'; lam and tau are
    # then derived from the climb parameters, not taken from above)
    epsilon: float = 0.25
    delta: float = 0.25
    t: float = 16.0
    beta: float = 1.0
    kappa: float = 1.0
    start_x: float = 0.0
    start_y: float = 0.0
    replicas: int = Field(1000, ge=1, le=1_000_000)
    seed: int = 0
    sim: SimKnobs = SimKnobs()


class ImportanceResponse(BaseModel):
    result: EstimateOut
    log_weight_min: float
    log_weight_median: float
    log_weight_max: float
    hits: int
    lam: float
    tau: float
    manifest: Manifest


class BirthDeathRequest(BaseModel):
    params: ParamsIn = ParamsIn()
    schedule: Literal["constant", "ascent"] = "ascent"
    birth: float = 1.0     # constant schedule
    death: float = 2.0
    horizon: float = 1.0
    t: float = 10.0        # ascent schedule macroscopic scale
    gamma: float = 1.0
    kappa: float = 1.0
    replicas: int = Field(0, ge=0, le=1_000_000)  # 0 = formula mode only
    seed: int = 0
    n_max: int = Field(16, ge=1, le=1000)


class BirthDeathResponse(BaseModel):
    w: float
    u: float
    v: float
    mean: float
    pmf: list[float]
    survival_exact: float
    survival_approx: float
    k_tau: float
    approx_applicable: bool
    empirical_mean: float | None = None
    empirical_pmf: list[float] | None = None
    manifest: Manifest


class OracleRequest(BaseModel):
    params: ParamsIn = ParamsIn()
    estimator: Literal["many_to_one", "transformed", "population"] = "many_to_one"
    f: str = "one"
    lam: float = -0.3  # transformed only
    t: float = 0.75
    start_x: float = 0.0
    start_y: float = 0.0
    replicas: int = Field(1000, ge=1, le=1_000_000)
    seed: int = 0


class OracleResponse(BaseModel):
    result: EstimateOut
    closed_form: float | None = None
    manifest: Manifest


class VerifyRequest(BaseModel):
    suite: Literal["closed-form", "paths", "oracle", "martingale",
                   "birthdeath", "spine", "growth", "all"] = "closed-form"
    seed: int | None = None
    scale: float = Field(1.0, gt=0.0, le=1.0)


class CheckRowOut(BaseModel):
    criterion: int
    name: str
    passed: bool | None
    measured: str
    threshold: str
    note: str = ""


class VerifyResponse(BaseModel):
    suite: str
    passed: bool
    rows: list[CheckRowOut]
    wall_time_s: float
    report_csv: str
