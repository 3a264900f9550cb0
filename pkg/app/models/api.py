from pydantic import BaseModel, ConfigDict, Field
from typing import List

from app.models.weights import NormSpec, WeightSpec


class DLengthRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dimension: int = Field(2, ge=2, le=3)
    weight: WeightSpec = Field(default_factory=WeightSpec)
    mu: NormSpec = Field(default_factory=NormSpec)
    vertices: List[List[float]]
    quad_nodes: int = Field(16, ge=8, le=128)


class DLengthResponse(BaseModel):
    length: float
    mu_length: float


class ShapeConstantsRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dimension: int = Field(2, ge=2, le=3)
    mu: NormSpec = Field(default_factory=NormSpec)
    direction_count: int = Field(1024, ge=64, le=65536)


class DistanceResponse(BaseModel):
    distance: float


class AlphaConditionResponse(BaseModel):
    satisfied: bool
    threshold: float


class UrnLawResponse(BaseModel):
    steps: int
    alpha: float
    law: List[float]
