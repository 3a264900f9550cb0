"""The d=1 chain as a Polya-type urn.

After k_R right and k_L left absorptions the two boundary edges have weights
f(k_R + 1/2) and f(-(k_L + 1/2)); for f(z) = |z| this is the urn that adds
one ball per draw to the drawn side with half a ball of initial mass each.
"""
import logging
from functools import partial
from typing import List

import numpy as np

from app.core.errors import DimensionError
from app.core.parallel import run_replicates
from app.engine import eden_chain_d1_batch, run_eden_chain
from app.models.experiment import ExperimentSpec, UrnReport
from app.models.run import StopRule
from app.weights import AlphaWeightFunction, build_weight

logger = logging.getLogger(__name__)


def exact_urn_law(f: AlphaWeightFunction, steps: int) -> np.ndarray:
    """P(k_R = k) for k = 0..steps, by dynamic programming over the chain."""
    if f.d != 1:
        raise DimensionError(f"the urn law is one-dimensional, got d={f.d}")
    law = np.zeros(steps + 1)
    law[0] = 1.0
    k = np.arange(steps + 1, dtype=float)
    for n in range(steps):
        right = f.evaluate((k[: n + 1] + 0.5)[:, None])
        left = f.evaluate((-(n - k[: n + 1] + 0.5))[:, None])
        p = right / (right + left)
        nxt = np.zeros(steps + 1)
        nxt[: n + 1] += law[: n + 1] * (1.0 - p)
        nxt[1: n + 2] += law[: n + 1] * p
        law = nxt
    return law


def chain_right_count(seed: int, spec: ExperimentSpec) -> int:
    result = run_eden_chain(spec.engine_config.model_copy(update={
        "seed": seed,
        "holding_times": False,
        "stop_rule": StopRule(kind="edge_count", edges=spec.steps),
    }))
    return sum(1 for v in result.final_state.vertices() if v[0] > 0)


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def run_urn_d1(spec: ExperimentSpec, threads: int = 1, quiet: bool = False) -> UrnReport:
    cfg = spec.engine_config
    if cfg.dimension != 1:
        raise DimensionError(f"the urn experiment runs in d=1, got d={cfg.dimension}")
    f = build_weight(cfg.weight, 1)
    exact = exact_urn_law(f, spec.steps)
    if spec.sampler == "batch":
        counts = eden_chain_d1_batch(f, spec.steps, spec.replicates, cfg.seed)
    else:
        counts = np.array(run_replicates(partial(chain_right_count, spec=spec), spec.replicates, cfg.seed,
                                         threads=threads, desc="urn", quiet=quiet))
    empirical = np.bincount(counts, minlength=spec.steps + 1) / spec.replicates
    tv = total_variation(empirical, exact)
    logger.info("urn: N=%d, %d replicates, total variation %.5f", spec.steps, spec.replicates, tv)
    return UrnReport(spec=spec.model_dump(), steps=spec.steps, replicates=spec.replicates, seed=cfg.seed,
                     sampler=spec.sampler, empirical=empirical.tolist(), exact=exact.tolist(), total_variation=tv)


def urn_law_rows(report: UrnReport) -> List[list]:
    return [[k, e, x] for k, (e, x) in enumerate(zip(report.empirical, report.exact))]
