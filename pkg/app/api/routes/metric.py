from fastapi import APIRouter, Query

from app.dmetric import PLPath, cylinder_distance_closed_form, d_length, tube_distance_bounds
from app.models.api import DistanceResponse, DLengthRequest, DLengthResponse, ShapeConstantsRequest
from app.models.metric import TubeBounds
from app.models.weights import ShapeConstants
from app.weights import build_norm, build_weight, compute_shape_constants

router = APIRouter()


@router.post("/d-length", response_model=DLengthResponse)
def path_d_length(request: DLengthRequest):
    f = build_weight(request.weight, request.dimension)
    mu = build_norm(request.mu, request.dimension)
    path = PLPath(request.vertices)
    return {"length": d_length(path, f, mu, request.quad_nodes), "mu_length": path.mu_length(mu)}


@router.post("/shape-constants", response_model=ShapeConstants)
def shape_constants(request: ShapeConstantsRequest):
    return compute_shape_constants(build_norm(request.mu, request.dimension), request.direction_count,
                                   request.dimension)


@router.get("/cylinder-distance", response_model=DistanceResponse)
def cylinder_distance(
    q: float = Query(..., gt=1),
    alpha: float = Query(..., gt=1),
    kappa_upper_s: float = Query(1.0, gt=0),
):
    return {"distance": cylinder_distance_closed_form(q, alpha, kappa_upper_s)}


@router.get("/tube-bounds", response_model=TubeBounds)
def tube_bounds(
    q: float = Query(..., gt=1),
    alpha: float = Query(..., gt=1),
    s: float = Query(..., gt=1),
    zeta: float = Query(0.0, ge=0),
    kappa_upper_s: float = Query(1.0, gt=0),
    kappa_lower_s: float = Query(1.0, gt=0),
):
    return tube_distance_bounds(q, alpha, s, zeta, kappa_upper_s, kappa_lower_s)
