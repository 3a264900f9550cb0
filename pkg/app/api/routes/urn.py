from fastapi import APIRouter, Query

from app.experiments.urn import exact_urn_law
from app.models.api import UrnLawResponse
from app.weights import AlphaWeightFunction

router = APIRouter()


@router.get("/law", response_model=UrnLawResponse)
def urn_law(steps: int = Query(..., ge=1, le=4096), alpha: float = Query(1.0)):
    """Exact law of the right-edge count of the d=1 chain with f(z) = |z|^alpha."""
    law = exact_urn_law(AlphaWeightFunction(alpha, d=1), steps)
    return {"steps": steps, "alpha": alpha, "law": law.tolist()}
