import logging
import os

from app.geometry import estimate_mu
from app.models.experiment import ExperimentSpec, MuEstimateReport

logger = logging.getLogger(__name__)


def run_mu_estimate(spec: ExperimentSpec, output_dir: str, threads: int = 1, quiet: bool = False) -> MuEstimateReport:
    """Estimate the standard-FPP shape norm and store it as a table the weights module loads."""
    estimate = estimate_mu(spec.replicates, spec.t, spec.engine_config.seed, spec.direction_bins,
                           d=spec.engine_config.dimension, threads=threads, quiet=quiet)
    path = estimate.to_csv(os.path.join(output_dir, "mu_estimate.csv"))
    logger.info("wrote estimated shape norm to %s", path)
    return MuEstimateReport(spec=spec.model_dump(), estimate=estimate.report(path))
