from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing import List, Literal, Optional


class TableSpec(BaseModel):
    """Direction table: angles (d=2, radians) or unit directions (d=3) with one value each."""
    model_config = ConfigDict(extra="forbid")

    angles: Optional[List[float]] = None
    directions: Optional[List[List[float]]] = None
    values: List[float] = Field(default_factory=list)
    csv_path: Optional[str] = None

    @model_validator(mode="after")
    def _check_table(self):
        if self.csv_path:
            return self
        count = len(self.angles or self.directions or [])
        if count == 0:
            raise ValueError("table needs angles, directions or csv_path")
        if count != len(self.values):
            raise ValueError(f"table has {count} nodes but {len(self.values)} values")
        if any(v <= 0 for v in self.values):
            raise ValueError("table values must be strictly positive")
        return self


class NormSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["euclidean", "l1", "linf", "box", "cylinder", "tabulated"] = "euclidean"
    scale: float = Field(1.0, gt=0)
    # box
    half_widths: Optional[List[float]] = None
    # cylinder
    axis_direction: Optional[List[float]] = None
    axis_halfheight: float = Field(1.0, gt=0)
    cross_section: Optional["NormSpec"] = None
    aspect: Optional[float] = None
    # tabulated
    table: Optional[TableSpec] = None

    @model_validator(mode="after")
    def _check_kind_params(self):
        if self.kind == "box":
            if not self.half_widths or any(w <= 0 for w in self.half_widths):
                raise ValueError("box norm needs positive half_widths")
        if self.kind == "cylinder":
            if self.axis_direction is None:
                raise ValueError("cylinder norm needs axis_direction")
            if self.aspect is None or self.aspect <= 1:
                raise ValueError("cylinder norm needs aspect s > 1")
        if self.kind == "tabulated" and self.table is None:
            raise ValueError("tabulated norm needs a table")
        return self


class ProfileSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["constant", "norm_power", "tabulated", "norm_ratio"] = "constant"
    value: float = Field(1.0, gt=0)
    norm: Optional[NormSpec] = None
    # exponent of norm_power / norm_ratio; None means "use the weight's alpha"
    power: Optional[float] = None
    denominator: Optional[NormSpec] = None
    table: Optional[TableSpec] = None

    @model_validator(mode="after")
    def _check_kind_params(self):
        if self.kind in ("norm_power", "norm_ratio") and self.norm is None:
            raise ValueError(f"{self.kind} profile needs a norm")
        if self.kind == "tabulated" and self.table is None:
            raise ValueError("tabulated profile needs a table")
        return self


class WeightSpec(BaseModel):
    """f(z) = |z|^alpha f0(z/|z|)."""
    model_config = ConfigDict(extra="forbid")

    alpha: float = 0.0
    profile: ProfileSpec = Field(default_factory=ProfileSpec)
    lipschitz_bound: Optional[float] = None

    @field_validator("lipschitz_bound")
    def _non_negative(cls, v):
        if v is not None and v < 0:
            raise ValueError("lipschitz_bound must be non-negative")
        return v


class ShapeConstants(BaseModel):
    rho_upper: float
    rho_lower: float
    maximizer_directions: List[List[float]] = []
    direction_count: int
    tolerance: float = 1e-8


class LipschitzReport(BaseModel):
    samples: int
    seed: int
    max_ratio: float
    declared_bound: Optional[float] = None
    lipschitz_constant_a: float
    full_space_violations: int
    passed: bool


class LambdaReport(BaseModel):
    value: float
    error_estimate: float
    resolutions: List[int]
    raw_values: List[float]
    quadrature_nodes: int


NormSpec.model_rebuild()
