import math

import numpy as np
import pytest

from app.core.errors import ConfigError, DomainError, PreconditionError
from app.models.weights import NormSpec, ProfileSpec, TableSpec, WeightSpec
from app.weights import (
    AlphaWeightFunction,
    EuclideanNorm,
    L1Norm,
    LinfNorm,
    SphericalTable,
    build_norm,
    build_weight,
    check_lipschitz,
    compute_lambda,
    compute_shape_constants,
    edge_weight,
    evaluate_f,
    segment_d_lengths,
    sphere_directions,
)
from app.lattice import make_edge


def test_sphere_directions_d2_are_equally_spaced():
    dirs = sphere_directions(2, 8)
    assert dirs.shape == (8, 2)
    assert dirs[0] == pytest.approx([1.0, 0.0])
    assert dirs[2] == pytest.approx([0.0, 1.0], abs=1e-12)
    assert np.linalg.norm(sphere_directions(3, 100), axis=1) == pytest.approx(np.ones(100))


def test_alpha_weight_is_homogeneous():
    f = AlphaWeightFunction(0.5)
    assert evaluate_f(f, (3, 4)) == pytest.approx(math.sqrt(5.0))
    z = np.array([[0.3, -1.2]])
    assert f.evaluate(4.0 * z)[0] == pytest.approx(4.0 ** 0.5 * f.evaluate(z)[0])


def test_weight_is_undefined_at_origin():
    f = AlphaWeightFunction(1.0)
    with pytest.raises(DomainError):
        evaluate_f(f, (0, 0))
    with pytest.raises(DomainError):
        f.evaluate(np.zeros((1, 2)))


def test_edge_weight_uses_midpoint():
    f = AlphaWeightFunction(1.0)
    assert edge_weight(f, make_edge((0, 0), (1, 0))) == pytest.approx(0.5)
    assert edge_weight(f, make_edge((3, 4), (3, 3))) == pytest.approx(math.hypot(3, 3.5))


def test_norm_power_profile_defaults_to_alpha(l1_weight_spec):
    f = build_weight(l1_weight_spec, 2)
    # alpha = 1 with f0 = |u|_1 gives f = |z|_1
    assert evaluate_f(f, (2.0, -3.0)) == pytest.approx(5.0)
    assert f.kappa_lower == pytest.approx(1.0, abs=1e-9)
    assert f.kappa_upper == pytest.approx(math.sqrt(2.0), abs=1e-6)


def test_scalar_and_vector_paths_agree(l1_weight_spec):
    f = build_weight(l1_weight_spec, 2)
    pts = np.random.default_rng(1).standard_normal((50, 2))
    assert f.evaluate(pts) == pytest.approx([f.scalar(tuple(p)) for p in pts])


@pytest.mark.parametrize("kind,rho_upper,rho_lower", [
    ("euclidean", 1.0, 1.0),
    ("l1", 1.0, 1.0 / math.sqrt(2.0)),
    ("linf", math.sqrt(2.0), 1.0),
])
def test_shape_constants(kind, rho_upper, rho_lower):
    consts = compute_shape_constants(build_norm(NormSpec(kind=kind), 2), 1024, 2)
    assert consts.rho_upper == pytest.approx(rho_upper, abs=1e-6)
    assert consts.rho_lower == pytest.approx(rho_lower, abs=1e-6)
    assert consts.maximizer_directions


def test_shape_constants_need_enough_directions():
    with pytest.raises(PreconditionError):
        compute_shape_constants(EuclideanNorm(), 10, 2)


def test_scaled_and_box_norms():
    norm = build_norm(NormSpec(kind="linf", scale=2.0), 2)
    assert norm.scalar((1.0, -3.0)) == pytest.approx(6.0)
    box = build_norm(NormSpec(kind="box", half_widths=[2.0, 1.0]), 2)
    assert box.scalar((2.0, 0.5)) == pytest.approx(1.0)
    with pytest.raises(ConfigError):
        build_norm(NormSpec(kind="box", half_widths=[2.0, 1.0]), 3)


def test_spherical_table_interpolates_and_round_trips(tmp_path):
    table = SphericalTable(2, np.array([0.0, 0.5, 1.0, 1.5]) * math.pi, np.array([1.0, 2.0, 1.0, 2.0]))
    u = np.array([[math.cos(math.pi / 4), math.sin(math.pi / 4)]])
    assert table.evaluate(u)[0] == pytest.approx(1.5)
    loaded = SphericalTable.from_csv(table.to_csv(str(tmp_path / "table.csv")))
    assert loaded.values.tolist() == table.values.tolist()
    assert loaded.nodes.tolist() == table.nodes.tolist()


def test_tabulated_profile_from_spec():
    spec = WeightSpec(alpha=0.0, profile=ProfileSpec(
        kind="tabulated", table=TableSpec(angles=[0.0, math.pi / 2, math.pi, 3 * math.pi / 2],
                                          values=[1.0, 3.0, 1.0, 3.0])))
    f = build_weight(spec, 2)
    assert f.kappa_lower == pytest.approx(1.0)
    assert f.kappa_upper == pytest.approx(3.0)


def test_table_rejects_non_positive_values():
    with pytest.raises(ConfigError):
        SphericalTable(2, np.array([0.0, 1.0, 2.0]), np.array([1.0, 0.0, 1.0]))


def test_missing_table_file(tmp_path):
    with pytest.raises(ConfigError) as exc:
        SphericalTable.from_csv(str(tmp_path / "missing.csv"))
    assert exc.value.category == "config.not_found"


def test_lipschitz_check_passes_for_smooth_profiles(l1_weight_spec):
    report = check_lipschitz(AlphaWeightFunction(0.5), 2000, seed=3)
    assert report.passed and report.max_ratio == 0.0
    report = check_lipschitz(build_weight(l1_weight_spec, 2), 2000, seed=3)
    assert report.passed
    assert report.full_space_violations == 0


def test_lipschitz_check_flags_a_false_declared_bound(l1_weight_spec):
    spec = l1_weight_spec.model_copy(update={"lipschitz_bound": 0.01})
    assert not check_lipschitz(build_weight(spec, 2), 2000).passed


def test_segment_d_lengths_constant_weight_is_mu_length():
    starts = np.array([[1.0, 0.0], [0.0, 2.0]])
    ends = np.array([[2.0, 1.0], [0.0, 3.0]])
    lengths = segment_d_lengths(AlphaWeightFunction(0.0), LinfNorm(), starts, ends, 8)
    assert lengths == pytest.approx([1.0, 1.0])


@pytest.mark.parametrize("alpha", [0.0, 1.0])
def test_lambda_is_pi_for_the_round_unit_circle(alpha):
    report = compute_lambda(AlphaWeightFunction(alpha), EuclideanNorm(), 1024, extrapolate=True)
    assert abs(report.value - math.pi) < 0.02
    assert report.resolutions == [1024, 512, 256]


def test_lambda_scales_with_the_mu_norm():
    lam_l1 = compute_lambda(AlphaWeightFunction(0.0), L1Norm(), 1024).value
    # half the l1 circumference of the Euclidean unit circle is 4
    assert lam_l1 == pytest.approx(4.0, abs=0.02)
