import math
import os

import numpy as np
import pytest
from scipy import stats

from app.core.errors import DimensionError, InsufficientSampleError, PreconditionError
from app.core.file_storage import ReportStorage
from app.experiments import estimate_chi, run_cone, run_covering, run_experiment, run_limit_shape, run_urn_d1
from app.experiments.analysis import fit_chi, hausdorff, loglog_fit, outer_boundary_points, rescale_exponent
from app.experiments.covering import annulus_points
from app.experiments.urn import exact_urn_law, total_variation
from app.models.experiment import ExperimentSpec
from app.models.run import RunConfig, StopRule
from app.models.weights import WeightSpec
from app.weights import AlphaWeightFunction


def urn_spec(alpha=1.0, replicates=100_000, steps=20, sampler="batch", seed=2):
    return ExperimentSpec(kind="urn_d1", replicates=replicates, steps=steps, sampler=sampler,
                          engine_config=RunConfig(dimension=1, weight=WeightSpec(alpha=alpha), seed=seed))


# --- analysis ---------------------------------------------------------------

def test_outer_boundary_of_a_single_vertex():
    points = outer_boundary_points([(0, 0)], 2)
    assert sorted(map(tuple, points.tolist())) == [(-0.5, 0.0), (0.0, -0.5), (0.0, 0.5), (0.5, 0.0)]


def test_outer_boundary_ignores_holes():
    ring = [(x, y) for x in (-1, 0, 1) for y in (-1, 0, 1) if (x, y) != (0, 0)]
    points = outer_boundary_points(ring, 2)
    assert len(points) == 12
    assert np.abs(points).max() == pytest.approx(1.5)


def test_hausdorff_and_loglog_fit():
    a = np.array([[0.0, 0.0]])
    b = np.array([[0.0, 0.0], [3.0, 4.0]])
    assert hausdorff(a, b) == pytest.approx(5.0)
    times = [1.0, 10.0, 100.0]
    slope, intercept = loglog_fit(times, [2.0 * t ** -0.5 for t in times])
    assert slope == pytest.approx(-0.5)
    assert intercept == pytest.approx(math.log(2.0))
    with pytest.raises(InsufficientSampleError):
        loglog_fit(times, [1.0, 0.0, -1.0])
    assert rescale_exponent(0.5) == pytest.approx(2.0)


def test_fit_chi_recovers_a_planted_exponent():
    times = np.array([1.0, 4.0, 16.0, 64.0, 256.0])
    noise = np.random.default_rng(4).normal(size=(6, 32))
    radii = 1.0 + noise[None, :, :] * times[:, None, None] ** -0.3
    chi, _, interval, widths = fit_chi(times, radii, resamples=50, seed=1)
    assert chi == pytest.approx(0.3, abs=1e-9)
    assert interval.low <= chi <= interval.high
    assert np.all(np.diff(widths) < 0)


def test_chi_preconditions():
    too_big = ExperimentSpec(kind="chi_estimate", times=[1.0, 10.0, 100.0, 1000.0],
                             engine_config=RunConfig(weight=WeightSpec(alpha=1.0)))
    with pytest.raises(PreconditionError):
        estimate_chi(too_big, quiet=True)
    short = ExperimentSpec(kind="chi_estimate", times=[1.0, 10.0, 100.0])
    with pytest.raises(InsufficientSampleError):
        estimate_chi(short, quiet=True)
    single = ExperimentSpec(kind="chi_estimate", times=[1.0, 10.0, 100.0, 1000.0], replicates=1)
    with pytest.raises(InsufficientSampleError):
        estimate_chi(single, quiet=True)


# --- urn --------------------------------------------------------------------

def test_exact_urn_law_is_binomial_without_weights():
    law = exact_urn_law(AlphaWeightFunction(0.0, d=1), 12)
    assert law == pytest.approx(stats.binom.pmf(np.arange(13), 12, 0.5), abs=1e-12)


def test_exact_urn_law_is_beta_binomial_for_linear_weights():
    law = exact_urn_law(AlphaWeightFunction(1.0, d=1), 20)
    assert law.sum() == pytest.approx(1.0)
    assert law == pytest.approx(stats.betabinom.pmf(np.arange(21), 20, 0.5, 0.5), abs=1e-12)


def test_exact_urn_law_needs_d1():
    with pytest.raises(DimensionError):
        exact_urn_law(AlphaWeightFunction(1.0, d=2), 5)


def test_batch_urn_matches_the_exact_law():
    report = run_urn_d1(urn_spec(), quiet=True)
    assert report.total_variation < 0.01
    assert len(report.empirical) == 21
    assert total_variation(report.empirical, report.exact) == pytest.approx(report.total_variation)


@pytest.mark.slow
def test_chain_urn_matches_the_exact_law():
    report = run_urn_d1(urn_spec(replicates=4000, sampler="chain"), quiet=True)
    assert report.total_variation < 0.05


def test_urn_rejects_higher_dimensions():
    spec = ExperimentSpec(kind="urn_d1", engine_config=RunConfig(dimension=2))
    with pytest.raises(DimensionError):
        run_urn_d1(spec, quiet=True)


def test_run_experiment_is_deterministic(tmp_path):
    outputs = []
    for name in ("a", "b"):
        storage = ReportStorage(str(tmp_path / name))
        run_experiment(urn_spec(replicates=2000), storage, quiet=True)
        assert storage.list_reports(None) == ["urn_d1.csv", "urn_d1.json"]
        outputs.append([open(storage.path(n), "rb").read() for n in ("urn_d1.csv", "urn_d1.json")])
    assert outputs[0] == outputs[1]
    rows = ReportStorage(str(tmp_path / "a")).load_csv("urn_d1.csv")
    assert [int(r["right_count"]) for r in rows] == list(range(21))


# --- covering ---------------------------------------------------------------

def test_annulus_points():
    assert sorted(annulus_points(1, 2)) == [(-1, 0), (0, -1), (0, 1), (1, 0)]
    assert len(annulus_points(2, 2)) == 8
    assert all(1 < sum(x * x for x in v) <= 4 for v in annulus_points(2, 3))


@pytest.mark.slow
def test_linear_weight_swallows_annuli():
    spec = ExperimentSpec(kind="covering", replicates=50, annuli=[10, 20], swallow_factor=8,
                          engine_config=RunConfig(weight=WeightSpec(alpha=1.0), seed=3))
    report = run_covering(spec, threads=2, quiet=True)
    assert report.condition_ok
    assert report.alpha_threshold == pytest.approx(1.0 + 1.0 / math.pi, rel=1e-2)
    assert min(report.swallow_fraction) >= 0.95


# --- cone -------------------------------------------------------------------

def cone_spec(aspect, replicates=20, edges=5000):
    return ExperimentSpec(kind="cone", replicates=replicates, aspect=aspect, tail_fraction=0.1,
                          engine_config=RunConfig(weight=WeightSpec(alpha=3.0), seed=5,
                                                  stop_rule=StopRule(kind="edge_count", edges=edges)))


def test_cone_needs_alpha_above_one():
    spec = cone_spec(8.0).model_copy(update={"engine_config": RunConfig(weight=WeightSpec(alpha=0.5))})
    with pytest.raises(PreconditionError):
        run_cone(spec, quiet=True)


@pytest.mark.slow
def test_wide_cylinder_contains_the_tail():
    wide = run_cone(cone_spec(8.0), threads=2, quiet=True)
    assert wide.conditions.almost_sure
    assert wide.containment_fraction >= 0.9
    control = run_cone(cone_spec(1.01), threads=2, quiet=True)
    assert not control.conditions.pos_prob
    assert control.containment_fraction < wide.containment_fraction


@pytest.mark.slow
def test_cone_containment_at_full_scale():
    wide = run_cone(cone_spec(8.0, replicates=100, edges=100_000), threads=4, quiet=True)
    assert wide.containment_fraction >= 0.95
    assert wide.passed
    control = run_cone(cone_spec(1.01, replicates=100, edges=100_000), threads=4, quiet=True)
    assert control.containment_fraction < wide.containment_fraction


# --- shape ------------------------------------------------------------------

def test_limit_shape_needs_alpha_below_one():
    spec = ExperimentSpec(kind="limit_shape", times=[1.0, 2.0], engine_config=RunConfig(weight=WeightSpec(alpha=1.5)))
    with pytest.raises(PreconditionError):
        run_limit_shape(spec, quiet=True)


@pytest.mark.slow
def test_limit_shape_smoke(tmp_path):
    spec = ExperimentSpec(kind="limit_shape", replicates=2, times=[2.0, 4.0, 8.0], dball_resolution=64,
                          engine_config=RunConfig(weight=WeightSpec(alpha=0.5), seed=11))
    report = run_experiment(spec, ReportStorage(str(tmp_path)), quiet=True)
    assert len(report.distances) == 3
    assert all(d > 0 for d in report.distances)
    assert set(report.self_similarity) == {"2"}
    assert os.path.exists(tmp_path / "limit_shape.csv")


@pytest.mark.slow
def test_mu_estimate_writes_a_loadable_table(tmp_path):
    spec = ExperimentSpec(kind="mu_estimate", replicates=2, t=50.0, direction_bins=16)
    report = run_experiment(spec, ReportStorage(str(tmp_path)), quiet=True)
    assert report.estimate.csv_path.endswith("mu_estimate.csv")
    assert os.path.exists(tmp_path / "mu_estimate.json")
