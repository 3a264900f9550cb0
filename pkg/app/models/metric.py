from pydantic import BaseModel
from typing import Dict, List, Optional


class GridParameters(BaseModel):
    step: float
    stencil_size: int
    anisotropy_factor: float
    quad_nodes: int
    snap_quad_nodes: int
    node_count: int
    edge_count: int


class ScalingReport(BaseModel):
    r: float
    alpha: float
    distance: float
    scaled_distance: float
    predicted: float
    relative_discrepancy: float
    grid: GridParameters


class SandwichReport(BaseModel):
    alpha: float
    branch: str
    phi: float
    distance: float
    upper: float
    tolerance: float
    rho_upper: float
    kappa_upper: float
    lower_ok: bool
    upper_ok: bool
    grid: GridParameters


class DBallReport(BaseModel):
    radius: float
    directions: int
    min_radius: float
    max_radius: float
    convex: bool
    convexity_defect: float
    center_rule: str
    seed_radius: float
    outer_bound: float
    bisection_tolerance: float
    grid: Optional[GridParameters] = None


class TubeBounds(BaseModel):
    upper: float
    ball_lower: float
    global_lower: float


class CylinderDistanceReport(BaseModel):
    alpha: float
    q: float
    s: float
    kappa_upper_s: float
    closed_form: float
    numeric: float
    relative_error: float
    grid: GridParameters


class TubeDistanceReport(BaseModel):
    alpha: float
    q: float
    s: float
    zeta: float
    bounds: TubeBounds
    restricted_numeric: float
    unrestricted_numeric: float
    upper_path_length: float
    tolerance_fraction: float
    checks: Dict[str, bool]


class ConeConditions(BaseModel):
    pos_prob: bool
    almost_sure: bool
    thresholds: List[float]


class ConeStats(BaseModel):
    total: int
    in_K: float
    in_negK: float
    outside_both: int


class EmpiricalNormReport(BaseModel):
    t: float
    replicates: int
    seeds: List[int]
    direction_bins: int
    min_radius: float
    max_radius: float
    csv_path: Optional[str] = None
