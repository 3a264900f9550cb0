"""Limit-shape convergence of weighted clusters (alpha < 1)."""
import logging
from functools import partial
from typing import Dict, List, Tuple

import numpy as np

import config as settings
from app.core.errors import PreconditionError
from app.core.parallel import run_replicates
from app.core.rng import derive_seeds
from app.dmetric import DBall, trace_d_ball
from app.engine import run_fpp
from app.experiments.analysis import bootstrap_interval, hausdorff, loglog_fit, outer_boundary_points, rescale_exponent
from app.models.experiment import ExperimentSpec, ShapeReport
from app.models.run import StopRule
from app.weights import build_norm, build_weight

logger = logging.getLogger(__name__)


def checkpoint_config(spec: ExperimentSpec, seed: int):
    """Engine config that snapshots at every checkpoint time and stops after the last."""
    return spec.engine_config.model_copy(update={
        "seed": seed,
        "snapshot_times": list(spec.times),
        "stop_rule": StopRule(kind="time", time=spec.times[-1]),
    })


def rescaled_boundaries(spec: ExperimentSpec, seed: int) -> List[np.ndarray]:
    """Outer boundary of the fattened cluster at each checkpoint, scaled by t^(-1/(1-alpha))."""
    d = spec.engine_config.dimension
    exponent = rescale_exponent(spec.engine_config.weight.alpha)
    result = run_fpp(checkpoint_config(spec, seed))
    return [outer_boundary_points(snap.vertices(), d) / t ** exponent
            for snap, t in zip(result.snapshots, spec.times)]


def _replicate_distances(seed: int, spec: ExperimentSpec, reference: np.ndarray) -> Tuple[List[float], Dict[str, float]]:
    boundaries = rescaled_boundaries(spec, seed)
    distances = [hausdorff(b, reference) for b in boundaries]
    index = {t: i for i, t in enumerate(spec.times)}
    pairs = {f"{t:g}": hausdorff(boundaries[i], boundaries[index[4 * t]])
             for i, t in enumerate(spec.times) if 4 * t in index}
    return distances, pairs


def run_limit_shape(spec: ExperimentSpec, threads: int = 1, quiet: bool = False) -> ShapeReport:
    """Hausdorff distance from the rescaled cluster to the unit D-ball at each checkpoint."""
    cfg = spec.engine_config
    if cfg.weight.alpha >= 1:
        raise PreconditionError(f"limit shapes exist for alpha < 1, got alpha={cfg.weight.alpha}")
    d = cfg.dimension
    f = build_weight(cfg.weight, d)
    ball: DBall = trace_d_ball(f, build_norm(spec.mu, d), 1.0, spec.dball_resolution)
    reference = ball.boundary_points

    results = run_replicates(partial(_replicate_distances, spec=spec, reference=reference),
                             spec.replicates, cfg.seed, threads=threads, desc="limit shape", quiet=quiet)
    per_replicate = np.array([r[0] for r in results])
    means = per_replicate.mean(axis=0)
    resamples = settings.BOOTSTRAP_RESAMPLES
    intervals = [bootstrap_interval(per_replicate[:, i], np.mean, resamples, cfg.seed)
                 for i in range(len(spec.times))]
    slope = slope_interval = None
    if len(spec.times) > 1:
        slope, _ = loglog_fit(spec.times, means)
        slope_interval = bootstrap_interval(per_replicate, lambda s: loglog_fit(spec.times, s.mean(axis=0))[0],
                                            resamples, cfg.seed)
    self_similarity = {k: float(np.mean([r[1][k] for r in results])) for k in results[0][1]}
    logger.info("limit shape: Hausdorff %s", ", ".join(f"t={t:g}: {m:.4f}" for t, m in zip(spec.times, means)))
    return ShapeReport(spec=spec.model_dump(), seeds=derive_seeds(cfg.seed, spec.replicates), times=spec.times,
                       distances=means.tolist(), distance_intervals=intervals, per_replicate=per_replicate.tolist(),
                       slope=slope, slope_interval=slope_interval, self_similarity=self_similarity,
                       reference=ball.report(), bootstrap_resamples=resamples)
