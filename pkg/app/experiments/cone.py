"""Cone containment for alpha > 1 with a cylinder-norm weight."""
import logging
import math
from functools import partial
from typing import Tuple

import numpy as np

from app.core.errors import PreconditionError
from app.core.parallel import run_replicates
from app.core.rng import derive_seeds
from app.engine import run_eden_chain
from app.geometry import ConeSpec, CylinderNorm, admissible_weight, check_cone_conditions, cone_membership_stats
from app.models.experiment import ConeReport, ExperimentSpec
from app.models.metric import ConeStats

logger = logging.getLogger(__name__)


def cone_cylinder(spec: ExperimentSpec) -> CylinderNorm:
    d = spec.engine_config.dimension
    axis = spec.axis_direction or [1.0] + [0.0] * (d - 1)
    return CylinderNorm(axis, spec.axis_halfheight, None, spec.aspect)


def tail_opening_angle(vertices: np.ndarray, axis: np.ndarray) -> float:
    """Twice the largest angle between a tail vertex and the nearer of +axis and -axis."""
    r = np.linalg.norm(vertices, axis=1)
    keep = r > 0
    cosines = np.abs(vertices[keep] @ axis) / r[keep]
    if cosines.size == 0:
        return 0.0
    return 2.0 * math.acos(min(1.0, float(cosines.min())))


def cone_replicate(seed: int, spec: ExperimentSpec) -> Tuple[ConeStats, float]:
    cylinder = cone_cylinder(spec)
    f = admissible_weight(cylinder, spec.engine_config.weight.alpha, spec.kappa_upper_s)
    # holding times off: with large alpha the reconstructed clock underflows
    result = run_eden_chain(spec.engine_config.model_copy(update={"seed": seed, "holding_times": False}), weight=f)
    stats = cone_membership_stats(result, ConeSpec(cylinder), spec.tail_fraction)
    vertices = np.array(result.final_state.vertices(), dtype=float)
    tail = vertices[len(vertices) - stats.total:]
    return stats, tail_opening_angle(tail, cylinder.axis)


def run_cone(spec: ExperimentSpec, threads: int = 1, quiet: bool = False) -> ConeReport:
    alpha = spec.engine_config.weight.alpha
    if alpha <= 1:
        raise PreconditionError(f"cone containment needs alpha > 1, got alpha={alpha}")
    cylinder = cone_cylinder(spec)
    conditions = check_cone_conditions(alpha, spec.aspect, spec.kappa_upper_s, spec.kappa_upper_s)
    results = run_replicates(partial(cone_replicate, spec=spec), spec.replicates, spec.engine_config.seed,
                             threads=threads, desc="cone", quiet=quiet)
    runs = [r[0] for r in results]
    contained = [max(s.in_K, s.in_negK) >= spec.containment_threshold for s in runs]
    fraction = float(np.mean(contained))
    logger.info("cone: s=%g, %.1f%% of runs contained (pos_prob=%s, almost_sure=%s)",
                spec.aspect, 100 * fraction, conditions.pos_prob, conditions.almost_sure)
    return ConeReport(spec=spec.model_dump(), seeds=derive_seeds(spec.engine_config.seed, spec.replicates),
                      conditions=conditions, runs=runs, contained=contained, containment_fraction=fraction,
                      passed=fraction >= spec.run_fraction_threshold,
                      opening_angle=ConeSpec(cylinder).euclidean_opening_angle,
                      empirical_opening_angles=[r[1] for r in results])
