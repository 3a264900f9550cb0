from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing import Dict, List, Literal, Optional

from app.models.weights import NormSpec, WeightSpec


class StopRule(BaseModel):
    """Exactly one stopping rule for a growth run."""
    model_config = ConfigDict(extra="forbid")

    kind: Literal["edge_count", "time", "euclid_radius", "norm_radius", "vertex_hit"] = "edge_count"
    edges: Optional[int] = Field(None, ge=1)
    time: Optional[float] = Field(None, gt=0)
    radius: Optional[float] = Field(None, ge=0)
    norm: Optional[NormSpec] = None
    vertex: Optional[List[int]] = None

    @model_validator(mode="after")
    def _check_parameters(self):
        required = {
            "edge_count": ("edges",),
            "time": ("time",),
            "euclid_radius": ("radius",),
            "norm_radius": ("radius", "norm"),
            "vertex_hit": ("vertex",),
        }[self.kind]
        missing = [name for name in required if getattr(self, name) is None]
        if missing:
            raise ValueError(f"stop rule '{self.kind}' needs {', '.join(missing)}")
        return self


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dimension: int = Field(2, ge=1, le=4)
    weight: WeightSpec = Field(default_factory=WeightSpec)
    seed: int = 0
    stop_rule: StopRule = Field(default_factory=lambda: StopRule(kind="edge_count", edges=1000))
    snapshot_steps: List[int] = []
    snapshot_times: List[float] = []
    passage_law: Literal["exponential", "uniform", "gamma", "constant"] = "exponential"
    gamma_shape: float = Field(2.0, gt=0)
    exit_radii: List[float] = []
    initial_edges: List[List[List[int]]] = []
    vertex_cap: Optional[int] = Field(None, ge=1)
    holding_times: bool = True

    @field_validator("snapshot_steps", "snapshot_times", "exit_radii")
    def _strictly_increasing(cls, v):
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("schedule must be strictly increasing")
        return v

    @model_validator(mode="after")
    def _check_dimensions(self):
        if self.stop_rule.vertex is not None and len(self.stop_rule.vertex) != self.dimension:
            raise ValueError(f"stop_rule.vertex must have {self.dimension} coordinates")
        for edge in self.initial_edges:
            if len(edge) != 2 or any(len(v) != self.dimension for v in edge):
                raise ValueError(f"initial edge {edge} is not a pair of {self.dimension}-vectors")
        return self


class TauInfinityReport(BaseModel):
    radii: List[float]
    sigma: List[float]
    ray_bounds: List[float]
    tail_bound: float
    seed: int


class NextEdgeReport(BaseModel):
    replicates: int
    seed: int
    counts: Dict[str, int]
    expected: Dict[str, float]
    chi_square: float
    p_value: float
