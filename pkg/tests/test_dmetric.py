import math

import numpy as np
import pytest

from app.core.errors import (
    ConfigError,
    DimensionError,
    DisconnectedDomainError,
    DomainError,
    PreconditionError,
    SingularityError,
)
from app.dmetric import (
    DBall,
    GeodesicGrid,
    PLPath,
    Region,
    comparison_lower_bound,
    convexity_defect,
    cylinder_distance_closed_form,
    d_distance,
    d_distance_restricted,
    d_length,
    radial_from_origin,
    sandwich_check,
    scaling_check,
    stencil_anisotropy,
    stencil_offsets,
    trace_d_ball,
    tube_distance_bounds,
)
from app.weights import AlphaWeightFunction, EuclideanNorm, L1Norm, compute_shape_constants

EUCLID = EuclideanNorm()


def test_constant_weight_length_is_mu_length():
    path = PLPath([(1.0, 1.0), (2.0, 3.0), (-1.0, 3.0)])
    f = AlphaWeightFunction(0.0)
    assert d_length(path, f, EUCLID) == pytest.approx(math.sqrt(5.0) + 3.0)
    assert d_length(path, f, L1Norm()) == pytest.approx(path.mu_length(L1Norm()))


def test_radial_length_closed_form():
    f = AlphaWeightFunction(0.5)
    assert radial_from_origin(f, EUCLID, np.array([[0.25, 0.0], [0.0, 4.0]])) == pytest.approx([1.0, 4.0])
    with pytest.raises(SingularityError):
        radial_from_origin(AlphaWeightFunction(1.0), EUCLID, np.array([[1.0, 0.0]]))


def test_path_through_origin_uses_radial_pieces():
    f = AlphaWeightFunction(0.5)
    assert d_length(PLPath([(-1.0, 0.0), (1.0, 0.0)]), f, EUCLID) == pytest.approx(4.0)
    with pytest.raises(SingularityError):
        d_length(PLPath([(-1.0, 0.0), (1.0, 0.0)]), AlphaWeightFunction(1.5), EUCLID)


def test_logarithmic_length_at_alpha_one():
    f = AlphaWeightFunction(1.0)
    assert d_length(PLPath([(1.0, 0.0), (2.0, 0.0)]), f, EUCLID) == pytest.approx(math.log(2.0), rel=1e-9)


def test_path_validation():
    with pytest.raises(DomainError):
        PLPath([(0.0, 0.0)])
    with pytest.raises(DomainError):
        PLPath([(1.0, 0.0), (1.0, 0.0), (2.0, 0.0)])
    with pytest.raises(PreconditionError):
        d_length(PLPath([(1.0, 0.0), (2.0, 0.0)]), AlphaWeightFunction(0.0), EUCLID, quad_nodes=4)


@pytest.mark.parametrize("d,reach,neighbours", [(2, 1, 8), (2, 2, 16), (2, 3, 32), (2, 4, 48), (3, 1, 26)])
def test_stencil_sizes(d, reach, neighbours):
    assert 2 * len(stencil_offsets(d, reach)) == neighbours


def test_sixteen_neighbour_anisotropy():
    assert stencil_anisotropy(EUCLID, 2, 2) == pytest.approx(1.0275, abs=1e-3)
    assert stencil_anisotropy(EUCLID, 2, 4) < stencil_anisotropy(EUCLID, 2, 3) < stencil_anisotropy(EUCLID, 2, 2)
    assert stencil_anisotropy(EUCLID, 3, 1) == pytest.approx(1.0 / math.cos(math.pi / 8.0))


def test_region_mask():
    region = Region(0.5, 2.0)
    mask = region(np.array([[0.1, 0.0], [1.0, 0.0], [0.0, 2.0], [3.0, 0.0]]))
    assert mask.tolist() == [False, True, True, False]
    assert region.describe()["norm"] == {"kind": "euclidean"}


def test_grid_distance_along_a_stencil_direction():
    f = AlphaWeightFunction(0.0)
    value = d_distance((1.0, 1.0), (2.0, 3.0), f, EUCLID, step=0.05)
    assert value == pytest.approx(math.sqrt(5.0), rel=5e-3)


def test_grid_rejects_bad_parameters():
    with pytest.raises(PreconditionError):
        GeodesicGrid(AlphaWeightFunction(0.0), EUCLID, 0.0, [-1, -1], [1, 1])
    with pytest.raises(ConfigError):
        GeodesicGrid(AlphaWeightFunction(0.0, d=3), EUCLID, 0.5, [-1] * 3, [1] * 3, reach=2)
    grid = GeodesicGrid(AlphaWeightFunction(0.0), EUCLID, 0.1, [0.5, 0.5], [1.0, 1.0])
    with pytest.raises(DomainError):
        grid.snap((5.0, 5.0))
    params = grid.parameters()
    assert params.stencil_size == 16
    assert params.node_count == len(grid.nodes)


def test_restricted_distance_goes_around_the_hole():
    f = AlphaWeightFunction(0.0)
    z, w = (1.0, 0.0), (-1.0, 0.0)
    free = d_distance(z, w, f, EUCLID, step=0.05)
    around = d_distance_restricted(z, w, f, EUCLID, Region(0.5, 2.0), step=0.05)
    # two tangents of length sqrt(3)/2 and a sixth of the inner circle
    exact = math.sqrt(3.0) + math.pi / 6.0
    assert free == pytest.approx(2.0, rel=0.03)
    assert 0.99 * exact <= around <= 1.04 * exact
    assert around > free


def test_restricted_distance_errors():
    f = AlphaWeightFunction(0.0)
    with pytest.raises(DomainError):
        d_distance_restricted((0.1, 0.0), (1.0, 0.0), f, EUCLID, Region(0.5, 2.0), step=0.1)
    split = lambda pts: np.abs(np.asarray(pts)[:, 0]) >= 0.5
    with pytest.raises(DisconnectedDomainError):
        d_distance_restricted((1.0, 0.0), (-1.0, 0.0), f, EUCLID, split, step=0.1)


@pytest.mark.parametrize("alpha", [-1.0, 0.0, 0.5, 2.0])
@pytest.mark.parametrize("r", [0.5, 2.0])
def test_scaling_law(alpha, r, l1_power):
    for f in (AlphaWeightFunction(alpha), l1_power(alpha)):
        report = scaling_check(f, EUCLID, (1.0, 0.5), (-0.5, 1.0), r, step=0.05)
        assert report.relative_discrepancy <= 0.03


@pytest.mark.slow
@pytest.mark.parametrize("alpha", [-1.0, 0.0, 0.5, 2.0])
def test_scaling_law_on_random_pairs(alpha, l1_power):
    rng = np.random.default_rng(int(10 * alpha) + 20)
    for _ in range(10):
        z, w = rng.uniform(-1.5, 1.5, size=(2, 2))
        if min(np.linalg.norm(z), np.linalg.norm(w)) < 0.2 or np.linalg.norm(z - w) < 0.2:
            continue
        for f in (AlphaWeightFunction(alpha), l1_power(alpha)):
            for r in (0.5, 2.0):
                assert scaling_check(f, EUCLID, z, w, r, step=0.02).relative_discrepancy <= 0.03


def test_comparison_bound_branches():
    z, w = np.array([1.0, 0.0]), np.array([2.0, 0.0])
    phi, branch = comparison_lower_bound(z, w, 1.0, 1.0, 1.0, EUCLID)
    assert branch == "alpha=1" and phi == pytest.approx(math.log(2.0))
    phi, branch = comparison_lower_bound(z, w, 2.0, 1.0, 1.0, EUCLID)
    assert branch == "alpha>=0" and phi == pytest.approx(0.5)
    phi, branch = comparison_lower_bound(z, np.array([-2.0, 0.0]), -1.0, 1.0, 1.0, EUCLID)
    # the clamp stops the radius at 0: (1 - 0) / 2
    assert branch == "alpha<0" and phi == pytest.approx(0.5)


@pytest.mark.parametrize("alpha,z,w", [
    (0.5, (1.0, 0.0), (0.0, 1.2)),
    (-0.5, (0.8, 0.6), (-1.0, -0.3)),
    (1.5, (1.0, 1.0), (0.5, -1.0)),
    (1.0, (1.2, -0.4), (-0.6, 1.1)),
])
def test_sandwich_holds(alpha, z, w, l1_power):
    for f in (AlphaWeightFunction(alpha), l1_power(alpha)):
        report = sandwich_check(f, EUCLID, z, w, step=0.05)
        assert report.lower_ok and report.upper_ok


@pytest.mark.slow
def test_sandwich_on_random_draws(l1_power):
    rng = np.random.default_rng(2024)
    consts = compute_shape_constants(EUCLID, 1024, 2)
    violations = 0
    for _ in range(100):
        alpha = float(rng.uniform(-1.0, 2.0))
        f = l1_power(alpha) if rng.random() < 0.5 else AlphaWeightFunction(alpha)
        z, w = rng.uniform(-1.5, 1.5, size=(2, 2))
        if min(np.linalg.norm(z), np.linalg.norm(w)) < 0.3:
            continue
        report = sandwich_check(f, EUCLID, z, w, step=0.02, shape_constants=consts)
        violations += not (report.lower_ok and report.upper_ok)
    assert violations == 0


def test_sandwich_rejects_the_origin():
    with pytest.raises(DomainError):
        sandwich_check(AlphaWeightFunction(0.5), EUCLID, (0.0, 0.0), (1.0, 0.0))


def test_unit_d_ball_is_a_round_ball_of_radius_quarter():
    ball = trace_d_ball(AlphaWeightFunction(0.5), EUCLID, 1.0, 256)
    assert len(ball.radii) == 256
    assert np.all(np.abs(ball.radii - 0.25) <= 0.02 * 0.25)
    assert ball.convex
    assert ball.outer_bound == pytest.approx(0.25)


def test_d_ball_scales_like_radius_power():
    f = AlphaWeightFunction(0.5)
    small = trace_d_ball(f, EUCLID, 1.0, 64, step=0.005)
    large = trace_d_ball(f, EUCLID, 2.0, 64, step=0.02)
    assert large.radii.mean() == pytest.approx(4.0 * small.radii.mean(), rel=0.02)


def test_anisotropic_d_ball_is_convex(l1_power):
    ball = trace_d_ball(l1_power(0.5), EUCLID, 1.0, 128, step=0.01)
    assert ball.radii.max() > ball.radii.min()
    # f0 is largest on the diagonals, so the ball reaches furthest there
    assert ball.radii[16] > ball.radii[0]
    assert ball.report().directions == 128


def test_d_ball_preconditions():
    with pytest.raises(PreconditionError):
        trace_d_ball(AlphaWeightFunction(1.0), EUCLID, 1.0)
    with pytest.raises(DimensionError):
        trace_d_ball(AlphaWeightFunction(0.5, d=1), EUCLID, 1.0)
    with pytest.raises(PreconditionError):
        trace_d_ball(AlphaWeightFunction(0.5), EUCLID, -1.0)


@pytest.mark.slow
def test_three_dimensional_d_ball():
    ball = trace_d_ball(AlphaWeightFunction(0.5, d=3), EUCLID, 1.0, 200)
    assert ball.triangles is not None
    assert np.all(np.abs(ball.radii - 0.25) <= 0.02 * 0.25)


def test_d_ball_csv_round_trip(tmp_path):
    ball = DBall(radius=1.0, directions=np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]]),
                 radii=np.array([0.1, 1.0 / 3.0, 0.7]))
    path = ball.to_csv(str(tmp_path / "ball.csv"))
    loaded = DBall.from_csv(path, radius=1.0)
    assert loaded.radii.tolist() == ball.radii.tolist()
    assert loaded.directions.tolist() == ball.directions.tolist()
    with pytest.raises(ConfigError):
        DBall.from_csv(str(tmp_path / "none.csv"))


def test_convexity_defect():
    square = np.array([[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]])
    assert convexity_defect(square) == pytest.approx(0.0)
    dented = np.vstack([square, [[0.0, 0.5]]])
    assert convexity_defect(dented) == pytest.approx(0.5)


@pytest.mark.parametrize("alpha,q,kappa,expected", [
    (2.0, 2.0, 1.0, 0.5),
    (3.0, 1.5, 1.0, (1.0 - 1.5 ** -2.0) / 2.0),
    (2.0, 2.0, 2.0, 0.25),
])
def test_cylinder_closed_form(alpha, q, kappa, expected):
    assert cylinder_distance_closed_form(q, alpha, kappa) == pytest.approx(expected)


def test_cylinder_closed_form_preconditions():
    with pytest.raises(PreconditionError):
        cylinder_distance_closed_form(1.0, 2.0, 1.0)
    with pytest.raises(PreconditionError):
        cylinder_distance_closed_form(2.0, 1.0, 1.0)


def test_tube_bounds_reference_case():
    bounds = tube_distance_bounds(2.0, 2.0, 2.0, 0.0, 1.0, 1.0)
    assert bounds.upper == pytest.approx(1.5)
    assert bounds.ball_lower == pytest.approx(0.75)
    assert bounds.global_lower == pytest.approx(0.7)
    with pytest.raises(PreconditionError):
        tube_distance_bounds(2.0, 2.0, 1.0, 0.0, 1.0, 1.0)
