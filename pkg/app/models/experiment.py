from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing import Dict, List, Literal, Optional

from app.models.metric import ConeConditions, ConeStats, DBallReport, EmpiricalNormReport
from app.models.run import RunConfig
from app.models.weights import NormSpec


class ExperimentSpec(BaseModel):
    """One experiment: the engine configuration plus the analysis knobs of its kind."""
    model_config = ConfigDict(extra="forbid")

    kind: Literal["limit_shape", "covering", "cone", "urn_d1", "chi_estimate", "mu_estimate"]
    engine_config: RunConfig = Field(default_factory=RunConfig)
    replicates: int = Field(10, ge=1)
    output_dir: Optional[str] = None
    # reference norm for D and the shape constants
    mu: NormSpec = Field(default_factory=NormSpec)
    # limit_shape / chi_estimate checkpoints
    times: List[float] = []
    direction_bins: int = Field(64, ge=8)
    dball_resolution: int = Field(256, ge=16)
    # covering
    annuli: List[int] = []
    swallow_factor: float = Field(8.0, gt=1)
    # cone
    aspect: float = Field(2.0, gt=1)
    axis_direction: Optional[List[float]] = None
    axis_halfheight: float = Field(1.0, gt=0)
    kappa_upper_s: float = Field(1.0, gt=0)
    tail_fraction: float = Field(0.1, gt=0, le=1)
    containment_threshold: float = Field(0.99, gt=0, le=1)
    run_fraction_threshold: float = Field(0.95, gt=0, le=1)
    # urn_d1
    steps: int = Field(20, ge=1)
    sampler: Literal["batch", "chain"] = "batch"
    # mu_estimate
    t: float = Field(50.0, gt=0)

    @field_validator("times", "annuli")
    def _strictly_increasing(cls, v):
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("schedule must be strictly increasing")
        return v

    @field_validator("annuli")
    def _positive_annuli(cls, v):
        if any(n < 1 for n in v):
            raise ValueError("annulus indices start at 1")
        return v

    @model_validator(mode="after")
    def _check_kind_params(self):
        if self.kind in ("limit_shape", "chi_estimate") and not self.times:
            raise ValueError(f"{self.kind} needs checkpoint times")
        if self.kind == "covering" and not self.annuli:
            raise ValueError("covering needs an annuli schedule")
        if self.axis_direction is not None and len(self.axis_direction) != self.engine_config.dimension:
            raise ValueError(f"axis_direction must have {self.engine_config.dimension} coordinates")
        return self


class Interval(BaseModel):
    low: float
    high: float


class ShapeReport(BaseModel):
    kind: str = "limit_shape"
    spec: Dict
    seeds: List[int]
    times: List[float]
    distances: List[float]
    distance_intervals: List[Interval]
    per_replicate: List[List[float]]
    slope: Optional[float] = None
    slope_interval: Optional[Interval] = None
    self_similarity: Dict[str, float] = {}
    reference: DBallReport
    bootstrap_resamples: int


class CoveringReport(BaseModel):
    kind: str = "covering"
    spec: Dict
    seeds: List[int]
    annuli: List[int]
    exit_radii: List[float]
    swallow_fraction: List[float]
    condition_ok: bool
    alpha_threshold: float
    rho_upper: float
    kappa_upper: float
    lam: float


class ConeReport(BaseModel):
    kind: str = "cone"
    spec: Dict
    seeds: List[int]
    conditions: ConeConditions
    runs: List[ConeStats]
    contained: List[bool]
    containment_fraction: float
    passed: bool
    opening_angle: float
    empirical_opening_angles: List[float]
    thresholds_note: str = "containment and run-fraction thresholds are experiment-level choices"


class UrnReport(BaseModel):
    kind: str = "urn_d1"
    spec: Dict
    steps: int
    replicates: int
    seed: int
    sampler: str
    empirical: List[float]
    exact: List[float]
    total_variation: float


class ChiReport(BaseModel):
    kind: str = "chi_estimate"
    spec: Dict
    seeds: List[int]
    times: List[float]
    widths: List[float]
    chi: float
    chi_interval: Interval
    intercept: float
    bootstrap_resamples: int


class MuEstimateReport(BaseModel):
    kind: str = "mu_estimate"
    spec: Dict
    estimate: EmpiricalNormReport
