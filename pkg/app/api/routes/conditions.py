from fastapi import APIRouter, Query

from app.geometry import alpha_near_1_threshold, check_alpha_near_1_condition, check_cone_conditions
from app.models.api import AlphaConditionResponse
from app.models.metric import ConeConditions

router = APIRouter()


@router.get("/cone", response_model=ConeConditions)
def cone_conditions(
    alpha: float = Query(..., gt=1),
    s: float = Query(..., gt=1),
    kappa_upper_s: float = Query(1.0, gt=0),
    kappa_lower_s: float = Query(1.0, gt=0),
):
    return check_cone_conditions(alpha, s, kappa_upper_s, kappa_lower_s)


@router.get("/alpha-near-1", response_model=AlphaConditionResponse)
def alpha_near_1(
    alpha: float = Query(..., ge=1),
    rho_upper: float = Query(..., gt=0),
    kappa_upper: float = Query(..., gt=0),
    lam: float = Query(..., gt=0),
):
    return {
        "satisfied": check_alpha_near_1_condition(alpha, rho_upper, kappa_upper, lam),
        "threshold": alpha_near_1_threshold(rho_upper, kappa_upper, lam),
    }
