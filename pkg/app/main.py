from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
import logging

from app.api.routes import conditions, metric, urn
from app.core.errors import WeightedFPPError

logger = logging.getLogger(__name__)

# Create FastAPI app
app = FastAPI(
    title="Weighted FPP API",
    description="Closed forms, shape constants and exact laws for f-weighted first-passage percolation",
    version="1.0.0"
)

# CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Include routers
app.include_router(metric.router, prefix="/api/metric", tags=["metric"])
app.include_router(conditions.router, prefix="/api/conditions", tags=["conditions"])
app.include_router(urn.router, prefix="/api/urn", tags=["urn"])


# Simulator errors become 422 with the stable category in the body
@app.exception_handler(WeightedFPPError)
async def simulator_exception_handler(request: Request, exc: WeightedFPPError):
    logger.info("%s %s rejected: %s", request.method, request.url.path, exc.category)
    return JSONResponse(status_code=422, content={"detail": exc.to_dict()})


# Health check
@app.get("/health")
async def health_check():
    return {"status": "healthy"}


@app.get("/")
async def root():
    return {"message": "Weighted FPP simulator", "docs": "/docs"}
