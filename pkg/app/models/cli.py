from pydantic import BaseModel, ConfigDict, Field
from typing import Dict, List, Literal, Optional

from app.models.run import RunConfig
from app.models.weights import NormSpec, WeightSpec

SUBCOMMANDS = ("simulate", "dball", "shape", "mu-estimate", "lambda", "cone", "cover", "urn", "chi", "render")

# subcommand -> ExperimentSpec.kind
EXPERIMENT_KINDS = {
    "shape": "limit_shape",
    "mu-estimate": "mu_estimate",
    "cone": "cone",
    "cover": "covering",
    "urn": "urn_d1",
    "chi": "chi_estimate",
}


class CliConfig(BaseModel):
    """Parsed command line, before the JSON document is loaded."""
    model_config = ConfigDict(extra="forbid")

    subcommand: Literal["simulate", "dball", "shape", "mu-estimate", "lambda", "cone", "cover", "urn", "chi", "render"]
    config_path: Optional[str] = None
    overrides: List[str] = []
    output_dir: str = "output"
    seed: Optional[int] = None
    threads: int = Field(1, ge=1)
    quiet: bool = False


class DBallConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dimension: int = Field(2, ge=2, le=3)
    weight: WeightSpec = Field(default_factory=lambda: WeightSpec(alpha=0.5))
    mu: NormSpec = Field(default_factory=NormSpec)
    radius: float = Field(1.0, gt=0)
    angular_resolution: int = Field(256, ge=16)
    step: Optional[float] = Field(None, gt=0)
    reach: Optional[int] = Field(None, ge=1, le=6)


class LambdaConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dimension: int = Field(2, ge=2, le=3)
    weight: WeightSpec = Field(default_factory=WeightSpec)
    mu: NormSpec = Field(default_factory=NormSpec)
    sphere_resolution: int = Field(1024, ge=128)
    quad_nodes: int = Field(16, ge=8)
    extrapolate: bool = True


class RunSummary(BaseModel):
    config: RunConfig
    sampler: str
    step_count: int
    vertex_count: int
    stop_time: float
    exit_vertex: Optional[List[int]] = None
    rng_draw_count: int
    exit_times: Dict[str, float] = {}
    files: List[str] = []
