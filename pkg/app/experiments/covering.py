"""Annulus covering for alpha near 1.

For each n the run is followed until it first leaves the Euclidean ball of
radius R*n; the annulus B_n minus B_(n-1) is swallowed if every lattice point
in it was absorbed by then.
"""
import itertools
import logging
import math
from functools import partial
from typing import List

import numpy as np

from app.core.parallel import run_replicates
from app.core.rng import derive_seeds
from app.engine import run_fpp
from app.geometry import alpha_near_1_threshold, check_alpha_near_1_condition
from app.models.experiment import CoveringReport, ExperimentSpec
from app.models.run import StopRule
from app.weights import build_norm, build_weight, compute_lambda, compute_shape_constants

logger = logging.getLogger(__name__)


def annulus_points(n: int, d: int) -> List[tuple]:
    """Lattice points v with n-1 < |v| <= n."""
    rng = range(-n, n + 1)
    lo, hi = (n - 1) ** 2, n ** 2
    return [v for v in itertools.product(rng, repeat=d) if lo < sum(x * x for x in v) <= hi]


def swallowed_annuli(seed: int, spec: ExperimentSpec) -> List[bool]:
    cfg = spec.engine_config
    radii = [spec.swallow_factor * n for n in spec.annuli]
    run = run_fpp(cfg.model_copy(update={
        "seed": seed,
        "exit_radii": radii,
        "stop_rule": StopRule(kind="euclid_radius", radius=radii[-1]),
    }))
    state = run.final_state
    out = []
    for n, r in zip(spec.annuli, radii):
        deadline = run.exit_times.get(r, math.inf)
        times = (state.passage_time(v) for v in annulus_points(n, cfg.dimension))
        out.append(all(t is not None and t <= deadline for t in times))
    return out


def run_covering(spec: ExperimentSpec, threads: int = 1, quiet: bool = False) -> CoveringReport:
    cfg = spec.engine_config
    d = cfg.dimension
    f = build_weight(cfg.weight, d)
    mu = build_norm(spec.mu, d)
    rho = compute_shape_constants(mu, 1024, d).rho_upper
    lam = compute_lambda(f, mu).value if d in (2, 3) else 1.0
    ok = f.alpha >= 1 and check_alpha_near_1_condition(f.alpha, rho, f.kappa_upper, lam)
    threshold = alpha_near_1_threshold(rho, f.kappa_upper, lam)
    if not ok:
        # the condition is sufficient, not necessary: run anyway
        logger.warning("alpha=%g is outside [1, %.6g); covering is not guaranteed", f.alpha, threshold)

    swallowed = np.array(run_replicates(partial(swallowed_annuli, spec=spec), spec.replicates, cfg.seed,
                                        threads=threads, desc="covering", quiet=quiet), dtype=float)
    fractions = swallowed.mean(axis=0)
    logger.info("covering: %s", ", ".join(f"n={n}: {p:.3f}" for n, p in zip(spec.annuli, fractions)))
    return CoveringReport(spec=spec.model_dump(), seeds=derive_seeds(cfg.seed, spec.replicates),
                          annuli=spec.annuli, exit_radii=[spec.swallow_factor * n for n in spec.annuli],
                          swallow_fraction=fractions.tolist(), condition_ok=ok, alpha_threshold=threshold,
                          rho_upper=rho, kappa_upper=f.kappa_upper, lam=lam)
