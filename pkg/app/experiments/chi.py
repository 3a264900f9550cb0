"""Convergence-exponent estimate from shape fluctuations."""
import logging
from functools import partial

import numpy as np

import config as settings
from app.core.errors import InsufficientSampleError, PreconditionError
from app.core.parallel import run_replicates
from app.core.rng import derive_seeds
from app.engine import run_fpp
from app.experiments.analysis import fit_chi, rescale_exponent
from app.experiments.limit_shape import checkpoint_config
from app.geometry import fattened_boundary_radii
from app.models.experiment import ChiReport, ExperimentSpec
from app.weights import sphere_directions

logger = logging.getLogger(__name__)


def replicate_radii(seed: int, spec: ExperimentSpec) -> np.ndarray:
    """Rescaled outer radius per direction bin at each checkpoint, shape (times, bins)."""
    d = spec.engine_config.dimension
    exponent = rescale_exponent(spec.engine_config.weight.alpha)
    directions = sphere_directions(d, spec.direction_bins)
    result = run_fpp(checkpoint_config(spec, seed))
    radii = np.array([fattened_boundary_radii(np.array(snap.vertices(), dtype=float), directions) / t ** exponent
                      for snap, t in zip(result.snapshots, spec.times)])
    if np.isnan(radii).any():
        raise InsufficientSampleError("a direction bin received no boundary points; use fewer direction_bins")
    return radii


def estimate_chi(spec: ExperimentSpec, threads: int = 1, quiet: bool = False) -> ChiReport:
    """Fit t^-chi to the fluctuation width; informational, the theoretical exponent is only a bound."""
    cfg = spec.engine_config
    if cfg.weight.alpha >= 1:
        raise PreconditionError(f"chi is defined for alpha < 1, got alpha={cfg.weight.alpha}")
    if len(spec.times) < 4 or spec.times[-1] < 100 * spec.times[0]:
        raise InsufficientSampleError("chi needs at least 4 checkpoint times spanning two decades")
    if spec.replicates < 2:
        raise InsufficientSampleError("chi needs at least 2 replicates to measure fluctuations")
    per_replicate = run_replicates(partial(replicate_radii, spec=spec), spec.replicates, cfg.seed,
                                   threads=threads, desc="chi", quiet=quiet)
    radii = np.stack(per_replicate, axis=1)
    resamples = settings.BOOTSTRAP_RESAMPLES
    chi, intercept, interval, widths = fit_chi(spec.times, radii, resamples, cfg.seed)
    logger.info("chi estimate %.4f [%.4f, %.4f]", chi, interval.low, interval.high)
    return ChiReport(spec=spec.model_dump(), seeds=derive_seeds(cfg.seed, spec.replicates), times=spec.times,
                     widths=widths.tolist(), chi=chi, chi_interval=interval, intercept=intercept,
                     bootstrap_resamples=resamples)
