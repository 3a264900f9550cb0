import math

import numpy as np
import pytest
from scipy.spatial import cKDTree

from app.core.errors import DimensionError, PreconditionError
from app.engine import run_eden_chain
from app.geometry import (
    AdmissibleProfile,
    ConeSpec,
    CylinderNorm,
    admissible_weight,
    alpha_near_1_threshold,
    check_alpha_near_1_condition,
    check_cone_conditions,
    cone_membership_stats,
    cylinder_boundary_gaps,
    cylinder_face_distance_check,
    cylinder_norm_eval,
    estimate_mu,
    fattened_boundary_radii,
    hull_radii,
    lattice_symmetries,
    symmetrize_radii,
    symmetry_orbits,
    tube_distance_check,
)
from app.models.run import RunConfig, StopRule
from app.models.weights import NormSpec
from app.weights import ConstantProfile, EuclideanNorm, LinfNorm, build_norm, compute_shape_constants, sphere_directions


@pytest.fixture
def cylinder():
    return CylinderNorm([1.0, 0.0], 1.0, EuclideanNorm(), 2.0)


@pytest.mark.parametrize("axis", [[1.0, 0.0], [1.0, 2.0]])
def test_cylinder_norm_triangle_inequality(axis):
    cyl = CylinderNorm(axis, 1.5, EuclideanNorm(), 3.0)
    rng = np.random.default_rng(4)
    for x, y, z in rng.normal(scale=5.0, size=(2000, 3, 2)):
        direct = cylinder_norm_eval(cyl, x - z)
        via = cylinder_norm_eval(cyl, x - y) + cylinder_norm_eval(cyl, y - z)
        assert direct <= via + 1e-12 * via


def test_cylinder_norm_values(cylinder):
    assert cylinder_norm_eval(cylinder, (1.0, 0.0)) == pytest.approx(1.0)
    assert cylinder_norm_eval(cylinder, (0.0, 2.0)) == pytest.approx(1.0)
    assert cylinder_norm_eval(cylinder, (0.5, 0.5)) == pytest.approx(0.5)
    pts = np.array([[1.0, 0.0], [0.0, -2.0], [-3.0, 1.0]])
    assert cylinder.evaluate(pts) == pytest.approx([1.0, 1.0, 3.0])
    assert cylinder.cross_radius == pytest.approx(1.0)


def test_cylinder_from_spec_and_validation():
    norm = build_norm(NormSpec(kind="cylinder", axis_direction=[0.0, 2.0], aspect=3.0), 2)
    assert norm.scalar((0.0, 1.0)) == pytest.approx(1.0)
    assert norm.scalar((3.0, 0.0)) == pytest.approx(1.0)
    with pytest.raises(PreconditionError):
        CylinderNorm([0.0, 0.0])
    with pytest.raises(PreconditionError):
        CylinderNorm([1.0, 0.0], aspect=1.0)


def test_cylinder_around_shape_uses_a_maximizer():
    mu = LinfNorm()
    consts = compute_shape_constants(mu, 1024, 2)
    cyl = CylinderNorm.around_shape(mu, 3.0, 2, consts)
    assert cyl.axis_halfheight == pytest.approx(math.sqrt(2.0), abs=1e-6)
    assert abs(abs(cyl.axis[0]) - abs(cyl.axis[1])) < 1e-6
    assert cyl.cross_radius == pytest.approx(math.sqrt(2.0), rel=1e-6)


def test_admissible_profile_is_constant_on_the_faces(cylinder):
    f = admissible_weight(cylinder, 2.0, 1.5)
    assert f.scalar((2.0, 0.0)) == pytest.approx(1.5 * 4.0)
    assert f.scalar((2.0, 1.0)) == pytest.approx(1.5 * 4.0)
    assert f.evaluate(np.array([[2.0, 1.0]]))[0] == pytest.approx(1.5 * 4.0)
    assert f.profile.kappa_lower_s == 1.5


def test_admissible_profile_with_a_base(cylinder):
    profile = AdmissibleProfile(cylinder, 2.0, 2.0, base=ConstantProfile(0.5))
    faces = np.array([[1.0, 0.0], [-1.0, 0.5]])
    assert profile.surface(faces) == pytest.approx([2.0, 2.0])
    assert profile.surface(np.array([[0.0, 2.0]]))[0] == pytest.approx(0.5)
    assert profile.kappa_lower_s == pytest.approx(0.5, abs=1e-3)


def test_cone_membership(cylinder):
    cone = ConeSpec(cylinder)
    assert (1.0, 0.0) in cone
    assert (1.0, 1.9) in cone
    assert (1.0, 2.1) not in cone
    assert (-1.0, 0.0) not in cone
    assert cone.euclidean_opening_angle == pytest.approx(2.0 * math.atan(2.0))


def test_cone_condition_thresholds_are_exact():
    conditions = check_cone_conditions(2.0, 4.0, 1.0, 1.0)
    assert conditions.thresholds == [3.0, 5.0]
    assert conditions.pos_prob and not conditions.almost_sure
    assert check_cone_conditions(2.0, 6.0, 1.0, 1.0).almost_sure
    with pytest.raises(PreconditionError):
        check_cone_conditions(1.0, 4.0, 1.0, 1.0)


def test_cone_thresholds_over_alpha():
    alphas = np.linspace(1.1, 10.0, 90)
    t1, t2 = np.array([check_cone_conditions(a, 2.0, 1.0, 1.0).thresholds for a in alphas]).T
    assert np.all(np.diff(t1) < 0)
    # alpha^alpha / (alpha-1)^(alpha-1) grows with alpha, so T2 bottoms out at the left end
    assert np.all(np.diff(t2) > 0)
    binding = np.maximum(t1, t2)
    low = int(np.argmin(binding))
    assert 0 < low < len(alphas) - 1
    assert np.all(np.diff(binding[:low + 1]) < 0) and np.all(np.diff(binding[low:]) > 0)


def test_alpha_near_1_threshold():
    assert alpha_near_1_threshold(1.0, 1.0, math.pi) == pytest.approx(1.0 + 1.0 / math.pi, abs=1e-12)
    assert check_alpha_near_1_condition(1.3, 1.0, 1.0, math.pi)
    assert not check_alpha_near_1_condition(1.4, 1.0, 1.0, math.pi)
    with pytest.raises(PreconditionError):
        check_alpha_near_1_condition(1.1, 0.0, 1.0, math.pi)


def test_cone_membership_stats_on_a_spike(cylinder):
    f = admissible_weight(cylinder, 3.0)
    config = RunConfig(seed=1, stop_rule=StopRule(kind="edge_count", edges=3000), holding_times=False)
    result = run_eden_chain(config, f)
    stats = cone_membership_stats(result, ConeSpec(cylinder), 0.1)
    assert stats.total == math.ceil(0.1 * len(result.final_state.vertices()))
    assert 0.0 <= stats.in_K <= 1.0 and 0.0 <= stats.in_negK <= 1.0
    assert stats.outside_both <= stats.total
    with pytest.raises(PreconditionError):
        cone_membership_stats(result, ConeSpec(cylinder), 0.0)


@pytest.mark.parametrize("alpha,q,s,kappa", [(2.0, 2.0, 2.0, 1.0), (3.0, 1.5, 3.0, 1.0), (2.0, 2.0, 2.0, 2.0)])
def test_face_distance_matches_closed_form(alpha, q, s, kappa):
    report = cylinder_face_distance_check(alpha, q, s, kappa)
    assert report.relative_error <= 0.015


def test_tube_distance_checks():
    report = tube_distance_check(2.0, 2.0, 2.0)
    assert report.bounds.upper == pytest.approx(1.5)
    assert all(report.checks.values()), report.checks
    assert report.upper_path_length <= 1.5 * 1.02


def test_cylinder_boundary_gaps(cylinder):
    gaps = cylinder_boundary_gaps(cylinder, 1.5)
    assert gaps["boundary_distance"] == pytest.approx(gaps["expected_boundary_distance"], abs=1e-6)
    assert gaps["lateral_distance"] == pytest.approx(gaps["lateral_bound"], abs=1e-6)
    with pytest.raises(PreconditionError):
        cylinder_boundary_gaps(cylinder, 1.0)


def test_lattice_symmetries():
    assert len(lattice_symmetries(2)) == 8
    assert len(lattice_symmetries(3)) == 48
    for m in lattice_symmetries(3):
        assert m @ m.T == pytest.approx(np.eye(3))


def test_fattened_radii_of_the_origin():
    directions = sphere_directions(2, 8)
    radii = fattened_boundary_radii(np.zeros((1, 2)), directions)
    assert radii[1] == pytest.approx(math.sqrt(0.5))
    assert math.isnan(radii[0])


def test_symmetrize_and_hull_radii():
    directions = sphere_directions(2, 8)
    radii = np.ones(8)
    assert symmetrize_radii(directions, radii) == pytest.approx(radii)
    dented = radii.copy()
    dented[0] = 0.5
    hull = hull_radii(directions, dented)
    assert hull[0] == pytest.approx(math.sqrt(0.5))
    assert hull[1:] == pytest.approx(np.ones(7))
    lopsided = np.array([2.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0])
    sym = symmetrize_radii(directions, lopsided)
    assert sym[[0, 2, 4, 6]] == pytest.approx([1.25] * 4)


def test_estimate_mu_preconditions():
    with pytest.raises(PreconditionError):
        estimate_mu(2, 10.0)
    with pytest.raises(PreconditionError):
        estimate_mu(2, 60.0, direction_bins=12)
    with pytest.raises(DimensionError):
        estimate_mu(2, 60.0, d=1)


@pytest.mark.slow
def test_estimate_mu_is_lattice_symmetric(tmp_path):
    estimate = estimate_mu(2, 50.0, seed=3, direction_bins=16)
    assert estimate.radii.min() > 0
    for m in lattice_symmetries(2):
        _, images = cKDTree(estimate.directions).query(estimate.directions @ m.T)
        assert np.array_equal(estimate.radii[images], estimate.radii)
    norm = estimate.norm()
    assert norm.scalar((estimate.radii[0], 0.0)) == pytest.approx(1.0)
    path = estimate.to_csv(str(tmp_path / "mu.csv"))
    assert estimate.report(path).direction_bins == 16


def test_symmetrized_radii_are_exactly_equal_on_orbits():
    directions = sphere_directions(2, 16)
    radii = np.random.default_rng(8).uniform(0.5, 1.5, 16)
    sym = symmetrize_radii(directions, radii)
    assert len(set(symmetry_orbits(directions))) == 3
    for m in lattice_symmetries(2):
        _, images = cKDTree(directions).query(directions @ m.T)
        assert np.array_equal(sym[images], sym)


@pytest.mark.slow
def test_estimate_mu_radii_settle_when_t_doubles():
    short = estimate_mu(20, 50.0, seed=6, direction_bins=16, threads=2)
    long = estimate_mu(20, 100.0, seed=6, direction_bins=16, threads=2)
    change = np.abs(long.radii - short.radii) / short.radii
    assert np.mean(change <= 4.0 * 50.0 ** -0.4) >= 0.9
