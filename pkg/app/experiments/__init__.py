"""Config-driven experiments. ``run_experiment`` dispatches on ``spec.kind`` and stores the report."""
import logging
from typing import Optional

from pydantic import BaseModel

from app.core.file_storage import ReportStorage
from app.experiments.chi import estimate_chi
from app.experiments.cone import run_cone
from app.experiments.covering import run_covering
from app.experiments.limit_shape import run_limit_shape
from app.experiments.mu_estimate import run_mu_estimate
from app.experiments.urn import run_urn_d1, urn_law_rows
from app.models.experiment import ExperimentSpec

logger = logging.getLogger(__name__)


def run_experiment(spec: ExperimentSpec, storage: ReportStorage, threads: int = 1, quiet: bool = False) -> BaseModel:
    if spec.kind == "limit_shape":
        report = run_limit_shape(spec, threads, quiet)
        storage.save_csv("limit_shape.csv", ["time", "hausdorff", "low", "high"],
                         [[t, m, i.low, i.high] for t, m, i in
                          zip(report.times, report.distances, report.distance_intervals)])
    elif spec.kind == "covering":
        report = run_covering(spec, threads, quiet)
        storage.save_csv("covering.csv", ["n", "exit_radius", "swallow_fraction"],
                         zip(report.annuli, report.exit_radii, report.swallow_fraction))
    elif spec.kind == "cone":
        report = run_cone(spec, threads, quiet)
        storage.save_csv("cone.csv", ["run", "seed", "total", "in_K", "in_negK", "outside_both", "contained"],
                         [[i, seed, s.total, s.in_K, s.in_negK, s.outside_both, c] for i, (seed, s, c) in
                          enumerate(zip(report.seeds, report.runs, report.contained))])
    elif spec.kind == "urn_d1":
        report = run_urn_d1(spec, threads, quiet)
        storage.save_csv("urn_d1.csv", ["right_count", "empirical", "exact"], urn_law_rows(report))
    elif spec.kind == "chi_estimate":
        report = estimate_chi(spec, threads, quiet)
        storage.save_csv("chi_estimate.csv", ["time", "width"], zip(report.times, report.widths))
    else:
        report = run_mu_estimate(spec, storage.output_dir, threads, quiet)
    storage.save_json(f"{spec.kind}.json", report)
    return report


__all__ = ["run_experiment", "run_limit_shape", "run_covering", "run_cone", "run_urn_d1", "estimate_chi",
           "run_mu_estimate"]
