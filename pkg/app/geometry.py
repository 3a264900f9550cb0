"""Cylinder constructions around the limit shape.

The cylinder Q_s is the product body {s*z + t*x : z in Q, t in [-1, 1]} with
x the axis vector and Q a symmetric cross-section of the hyperplane
orthogonal to it. Its gauge nu_s is the weight norm of the cone experiments;
a weight f = kappa * nu_s^alpha whose surface profile is constant on the two
flat faces is admissible.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property, partial
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import null_space
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import ConvexHull, cKDTree

from app.core.errors import DimensionError, InsufficientSampleError, PreconditionError
from app.core.parallel import run_replicates
from app.core.rng import derive_seeds
from app.dmetric import GeodesicGrid, PLPath, Region, cylinder_distance_closed_form, d_length, tube_distance_bounds
from app.engine import RunResult, run_fpp
from app.models.metric import (
    ConeConditions,
    ConeStats,
    CylinderDistanceReport,
    EmpiricalNormReport,
    TubeDistanceReport,
)
from app.models.run import RunConfig, StopRule
from app.models.weights import ShapeConstants, WeightSpec
from app.weights import (
    AlphaWeightFunction,
    EuclideanNorm,
    Norm,
    ScaledNorm,
    SphereProfile,
    SphericalTable,
    TabulatedNorm,
    compute_shape_constants,
    sphere_directions,
)

logger = logging.getLogger(__name__)


class CylinderNorm(Norm):
    """nu_s(z) = max(|<z, a>| / h, cross(z - <z, a> a) / s) with a the unit axis and h its half height."""

    kind = "cylinder"

    def __init__(self, axis_direction: Sequence[float], axis_halfheight: float = 1.0,
                 cross_section: Optional[Norm] = None, aspect: float = 2.0):
        axis = np.asarray(axis_direction, dtype=float)
        length = float(np.linalg.norm(axis))
        if length == 0:
            raise PreconditionError("cylinder axis direction must be non-zero")
        if axis_halfheight <= 0:
            raise PreconditionError("axis_halfheight must be positive")
        if aspect <= 1:
            raise PreconditionError(f"aspect s must exceed 1, got {aspect}")
        self.axis = axis / length
        self.d = len(self.axis)
        self.axis_halfheight = float(axis_halfheight)
        self.cross_section = cross_section or EuclideanNorm()
        self.aspect = float(aspect)
        self._axis_tuple = tuple(self.axis)

    @classmethod
    def around_shape(cls, mu: Norm, aspect: float, d: Optional[int] = None,
                     constants: Optional[ShapeConstants] = None) -> "CylinderNorm":
        """Cylinder over the shape of ``mu``: axis through a maximizer of |.| on its unit ball.

        The half height is rho_upper and the cross-section is the Euclidean ball of
        radius rho_upper, the smallest round section containing B_rho meet the hyperplane.
        """
        constants = constants or compute_shape_constants(mu, 1024, d)
        rho = constants.rho_upper
        return cls(constants.maximizer_directions[0], rho, ScaledNorm(EuclideanNorm(), 1.0 / rho), aspect)

    @property
    def axis_vector(self) -> np.ndarray:
        return self.axis * self.axis_halfheight

    def split(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(axial coordinate, orthogonal component) of each point."""
        axial = points @ self.axis
        return axial, points - axial[..., None] * self.axis

    def axial_part(self, points: np.ndarray) -> np.ndarray:
        return np.abs(np.asarray(points, dtype=float) @ self.axis) / self.axis_halfheight

    def lateral_part(self, points: np.ndarray) -> np.ndarray:
        _, ortho = self.split(np.asarray(points, dtype=float))
        return self.cross_section.evaluate(ortho) / self.aspect

    def evaluate(self, points):
        points = np.asarray(points, dtype=float)
        return np.maximum(self.axial_part(points), self.lateral_part(points))

    def scalar(self, z):
        axial = sum(x * a for x, a in zip(z, self._axis_tuple))
        ortho = tuple(x - axial * a for x, a in zip(z, self._axis_tuple))
        return max(abs(axial) / self.axis_halfheight, self.cross_section.scalar(ortho) / self.aspect)

    @cached_property
    def cross_radius(self) -> float:
        """Largest Euclidean radius of the cross-section's unit ball."""
        basis = null_space(self.axis[None, :])
        if basis.shape[1] == 1:
            dirs = np.stack([basis[:, 0], -basis[:, 0]])
        else:
            plane = sphere_directions(basis.shape[1], 720)
            dirs = plane @ basis.T
        return float((1.0 / self.cross_section.evaluate(dirs)).max())

    def boundary_samples(self, count: int) -> np.ndarray:
        """Points u / nu_s(u) of the unit sphere boundary along ``count`` directions."""
        dirs = sphere_directions(self.d, count)
        return dirs / self.evaluate(dirs)[:, None]

    def describe(self):
        return {"kind": self.kind, "axis_direction": self.axis.tolist(), "axis_halfheight": self.axis_halfheight,
                "cross_section": self.cross_section.describe(), "aspect": self.aspect}


def cylinder_norm_eval(cn: CylinderNorm, z: Sequence[float]) -> float:
    return cn.scalar(tuple(float(x) for x in z))


class AdmissibleProfile(SphereProfile):
    """f0(u) = nu_s(u)^alpha * f_s(u / nu_s(u)) with f_s = kappa_upper_s on the flat faces.

    Without a base profile f_s is constant. With one, f_s blends linearly from
    min(base, kappa_upper_s) at the equator of the lateral surface to
    kappa_upper_s at the face rims, which keeps it Lipschitz.
    """

    kind = "admissible"

    def __init__(self, cylinder: CylinderNorm, alpha: float, kappa_upper_s: float = 1.0,
                 base: Optional[SphereProfile] = None):
        if kappa_upper_s <= 0:
            raise PreconditionError("kappa_upper_s must be positive")
        self.cylinder = cylinder
        self.alpha = float(alpha)
        self.kappa_upper_s = float(kappa_upper_s)
        self.base = base

    def surface(self, points: np.ndarray) -> np.ndarray:
        """f_s on points of the cylinder boundary."""
        points = np.asarray(points, dtype=float)
        if self.base is None:
            return np.full(points.shape[:-1], self.kappa_upper_s)
        axial = np.clip(self.cylinder.axial_part(points), 0.0, 1.0)
        units = points / np.linalg.norm(points, axis=-1, keepdims=True)
        low = np.minimum(self.base.evaluate(units), self.kappa_upper_s)
        return low + (self.kappa_upper_s - low) * axial

    def evaluate(self, units):
        units = np.asarray(units, dtype=float)
        nu = self.cylinder.evaluate(units)
        return nu ** self.alpha * self.surface(units / nu[..., None])

    def scalar(self, u):
        if self.base is None:
            return self.kappa_upper_s * self.cylinder.scalar(u) ** self.alpha
        return super().scalar(u)

    @cached_property
    def kappa_lower_s(self) -> float:
        if self.base is None:
            return self.kappa_upper_s
        return float(self.surface(self.cylinder.boundary_samples(4096)).min())

    def describe(self):
        return {"kind": self.kind, "cylinder": self.cylinder.describe(), "alpha": self.alpha,
                "kappa_upper_s": self.kappa_upper_s,
                "base": self.base.describe() if self.base is not None else None}


def admissible_weight(cylinder: CylinderNorm, alpha: float, kappa_upper_s: float = 1.0,
                      base: Optional[SphereProfile] = None) -> AlphaWeightFunction:
    return AlphaWeightFunction(alpha, AdmissibleProfile(cylinder, alpha, kappa_upper_s, base), d=cylinder.d)


@dataclass(frozen=True)
class ConeSpec:
    """The cone K = union over r > 0 of r * (boundary of Q_s meet the face plane P_x)."""
    cylinder: CylinderNorm

    @property
    def apex_direction(self) -> np.ndarray:
        return self.cylinder.axis

    @property
    def euclidean_opening_angle(self) -> float:
        c = self.cylinder
        return 2.0 * math.atan(c.aspect * c.cross_radius / c.axis_halfheight)

    def membership(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        axial = points @ self.cylinder.axis
        return (axial > 0) & (self.cylinder.lateral_part(points) <= self.cylinder.axial_part(points) * (1 + 1e-12))

    def __contains__(self, z) -> bool:
        return bool(self.membership(z)[0])


def check_cone_conditions(alpha: float, s: float, kappa_upper_s: float, kappa_lower_s: float) -> ConeConditions:
    """s > 2^(alpha/(alpha-1)) - 1 and s > 1 + (kappa_upper_s/kappa_lower_s) alpha^alpha / (alpha-1)^(alpha-1)."""
    if alpha <= 1:
        raise PreconditionError(f"cone conditions need alpha > 1, got {alpha}")
    if s <= 1:
        raise PreconditionError(f"cone conditions need s > 1, got {s}")
    if kappa_upper_s <= 0 or kappa_lower_s <= 0:
        raise PreconditionError("kappa bounds must be positive")
    t1 = 2.0 ** (alpha / (alpha - 1.0)) - 1.0
    t2 = 1.0 + (kappa_upper_s / kappa_lower_s) * alpha ** alpha / (alpha - 1.0) ** (alpha - 1.0)
    return ConeConditions(pos_prob=s > t1, almost_sure=s > t2, thresholds=[t1, t2])


def check_alpha_near_1_condition(alpha: float, rho_upper: float, kappa_upper: float, lam: float) -> bool:
    """alpha < 1 + 1/(rho_upper * kappa_upper * lambda)."""
    if min(alpha, rho_upper, kappa_upper, lam) <= 0:
        raise PreconditionError("alpha, rho_upper, kappa_upper and lambda must be positive")
    return alpha < 1.0 + 1.0 / (rho_upper * kappa_upper * lam)


def alpha_near_1_threshold(rho_upper: float, kappa_upper: float, lam: float) -> float:
    return 1.0 + 1.0 / (rho_upper * kappa_upper * lam)


def cone_membership_stats(result: RunResult, cone: ConeSpec, tail_fraction: float) -> ConeStats:
    """Classify the last ``tail_fraction`` of absorbed vertices into K, -K or neither."""
    if not 0 < tail_fraction <= 1:
        raise PreconditionError(f"tail_fraction must be in (0, 1], got {tail_fraction}")
    vertices = np.array(result.final_state.vertices(), dtype=float)
    tail = vertices[len(vertices) - max(1, math.ceil(tail_fraction * len(vertices))):]
    in_k = cone.membership(tail)
    in_neg = cone.membership(-tail)
    return ConeStats(total=len(tail), in_K=float(in_k.mean()), in_negK=float(in_neg.mean()),
                     outside_both=int((~in_k & ~in_neg).sum()))


# ---------------------------------------------------------------------------
# Distance checks on the cylinder
# ---------------------------------------------------------------------------

def _axis_integral(a: float, b: float, alpha: float, kappa: float) -> float:
    """Integral of 1/(kappa t^alpha) over [a, b]."""
    if alpha == 1.0:
        return math.log(b / a) / kappa
    return (a ** (1.0 - alpha) - b ** (1.0 - alpha)) / (kappa * (alpha - 1.0))


def cylinder_face_distance_check(alpha: float, q: float, s: float, kappa_upper_s: float = 1.0,
                                 step: Optional[float] = None) -> CylinderDistanceReport:
    """Grid distance between the flat faces of Q_s and q*Q_s against the closed form (d=2, axis e1)."""
    closed = cylinder_distance_closed_form(q, alpha, kappa_upper_s)
    cylinder = CylinderNorm([1.0, 0.0], 1.0, EuclideanNorm(), s)
    f = admissible_weight(cylinder, alpha, kappa_upper_s)
    h = step or min(0.02, (q - 1.0) / 50.0)
    grid = GeodesicGrid(f, EuclideanNorm(), h, [1.0, -s * q], [q, s * q])
    x = grid.nodes[:, 0]
    first = x[x >= 1.0 - 1e-12].min()
    last = x[x <= q + 1e-12].max()
    sources = np.flatnonzero((np.abs(x - first) < 1e-9) & (np.abs(grid.nodes[:, 1]) <= s))
    targets = np.flatnonzero((np.abs(x - last) < 1e-9) & (np.abs(grid.nodes[:, 1]) <= s * last))
    # horizontal connectors from the faces to the first and last node columns are exact
    lead = _axis_integral(1.0, first, alpha, kappa_upper_s) if first > 1.0 else 0.0
    tail = _axis_integral(last, q, alpha, kappa_upper_s) if last < q else 0.0
    dist = grid.solve(sources, np.full(len(sources), lead))
    numeric = float(dist[targets].min()) + tail
    return CylinderDistanceReport(alpha=alpha, q=q, s=s, kappa_upper_s=kappa_upper_s, closed_form=closed,
                                  numeric=numeric, relative_error=abs(numeric - closed) / closed,
                                  grid=grid.parameters())


def tube_distance_check(alpha: float, q: float, s: float, zeta: float = 0.0, step: float = 0.05,
                        tolerance_fraction: float = 0.02, samples: int = 201) -> TubeDistanceReport:
    """Grid distances from Q_s to the lateral part of q*dQ_s, against the three closed-form bounds.

    Uses d=2, axis e1 with half height 1, the Euclidean cross-section and f = nu_s^alpha,
    so kappa_upper_s = kappa_lower_s = 1.
    """
    bounds = tube_distance_bounds(q, alpha, s, zeta, 1.0, 1.0)
    mu = EuclideanNorm()
    cylinder = CylinderNorm([1.0, 0.0], 1.0, mu, s)
    f = admissible_weight(cylinder, alpha)
    reach = s * (q + zeta) + 4.0 * step
    grid = GeodesicGrid(f, mu, step, [-reach, -reach], [reach, reach])
    x1 = np.linspace(-q, q, samples)
    lateral = np.concatenate([np.column_stack([x1, np.full(samples, s * q)]),
                              np.column_stack([x1, np.full(samples, -s * q)])])

    def to_lateral(g: GeodesicGrid) -> float:
        sources = np.flatnonzero(cylinder.evaluate(g.nodes) <= 1.0 + 1e-12)
        dist = g.solve(sources, np.zeros(len(sources)))
        return float(g.evaluate_from(dist, lateral).min())

    unrestricted = to_lateral(grid)
    restricted = to_lateral(grid.restricted(Region(0.0, q + zeta, cylinder)))
    upper_path = d_length(PLPath([(0.0, s), (1.0, s), (q, s)]), f, mu)
    slack = 1.0 - tolerance_fraction
    checks = {
        "upper_path_within_bound": upper_path <= bounds.upper * (1.0 + 1e-9),
        "restricted_above_ball_lower": restricted >= bounds.ball_lower * slack,
        "unrestricted_above_global_lower": unrestricted >= bounds.global_lower * slack,
        "restricted_above_unrestricted": restricted >= unrestricted - 1e-12,
    }
    if not all(checks.values()):
        logger.warning("tube distance checks failed for alpha=%g q=%g s=%g: %s", alpha, q, s,
                       [k for k, ok in checks.items() if not ok])
    return TubeDistanceReport(alpha=alpha, q=q, s=s, zeta=zeta, bounds=bounds, restricted_numeric=restricted,
                              unrestricted_numeric=unrestricted, upper_path_length=upper_path,
                              tolerance_fraction=tolerance_fraction, checks=checks)


def cylinder_boundary_gaps(cylinder: CylinderNorm, q: float, samples: int = 20000) -> Dict[str, float]:
    """Sampled Euclidean distances from dQ_s to q*dQ_s and to its lateral part.

    Returns the two distances next to the reference values h(q-1) and h*s*(q-1),
    which are exact when the cross-section's unit ball has radius h.
    """
    if q <= 1:
        raise PreconditionError(f"q must exceed 1, got {q}")
    inner = cylinder.boundary_samples(samples)
    outer = q * inner
    lateral = outer[cylinder.lateral_part(outer) >= cylinder.axial_part(outer)]
    gap, _ = cKDTree(outer).query(inner)
    lateral_gap, _ = cKDTree(lateral).query(inner)
    h = cylinder.axis_halfheight
    return {"boundary_distance": float(gap.min()), "expected_boundary_distance": h * (q - 1.0),
            "lateral_distance": float(lateral_gap.min()), "lateral_bound": h * cylinder.aspect * (q - 1.0)}


# ---------------------------------------------------------------------------
# Empirical shape norm
# ---------------------------------------------------------------------------

def lattice_symmetries(d: int) -> List[np.ndarray]:
    """The 2^d d! signed permutation matrices."""
    out = []
    for perm in itertools.permutations(range(d)):
        for signs in itertools.product((1.0, -1.0), repeat=d):
            m = np.zeros((d, d))
            m[np.arange(d), perm] = signs
            out.append(m)
    return out


def fattened_boundary_radii(vertices: np.ndarray, directions: np.ndarray) -> np.ndarray:
    """Outer radius per direction bin of the union of unit cubes centred on the vertices.

    Empty bins are NaN.
    """
    d = directions.shape[1]
    corners = np.stack(np.meshgrid(*[[-0.5, 0.5]] * d, indexing="ij"), axis=-1).reshape(-1, d)
    points = (np.asarray(vertices, dtype=float)[:, None, :] + corners[None]).reshape(-1, d)
    r = np.linalg.norm(points, axis=1)
    keep = r > 0
    _, bins = cKDTree(directions).query(points[keep] / r[keep, None])
    radii = np.full(len(directions), np.nan)
    np.fmax.at(radii, bins, r[keep])
    return radii


def symmetry_orbits(directions: np.ndarray) -> np.ndarray:
    """Orbit label per direction bin under the lattice symmetries, each image snapped to its nearest bin."""
    n = len(directions)
    tree = cKDTree(directions)
    images = np.concatenate([tree.query(directions @ m.T)[1] for m in lattice_symmetries(directions.shape[1])])
    graph = coo_matrix((np.ones(len(images)), (np.tile(np.arange(n), len(images) // n), images)), shape=(n, n))
    return connected_components(graph, directed=False)[1]


def symmetrize_radii(directions: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Orbit mean of the radii, written back to every bin of the orbit.

    Members of one orbit share the same float, so r(M u) == r(u) holds exactly.
    """
    labels = symmetry_orbits(directions)
    means = np.bincount(labels, weights=radii) / np.bincount(labels)
    return means[labels]


def hull_radii(directions: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Radii of the convex hull of the points r(u) u along the same directions."""
    hull = ConvexHull(directions * radii[:, None])
    normals, offsets = hull.equations[:, :-1], -hull.equations[:, -1]
    dots = directions @ normals.T
    with np.errstate(divide="ignore"):
        reach = np.where(dots > 1e-15, offsets / dots, np.inf)
    return reach.min(axis=1)


@dataclass
class EmpiricalNorm:
    """Estimated limit-shape norm: unit-ball radius per direction plus provenance."""
    directions: np.ndarray
    radii: np.ndarray
    t: float
    replicates: int
    seeds: List[int] = field(default_factory=list)

    @property
    def d(self) -> int:
        return self.directions.shape[1]

    def table(self) -> SphericalTable:
        if self.d == 2:
            return SphericalTable(2, np.arctan2(self.directions[:, 1], self.directions[:, 0]), self.radii)
        return SphericalTable(3, self.directions, self.radii)

    def norm(self) -> TabulatedNorm:
        return TabulatedNorm(self.table())

    def to_csv(self, path: str) -> str:
        return self.table().to_csv(path)

    def report(self, csv_path: Optional[str] = None) -> EmpiricalNormReport:
        return EmpiricalNormReport(t=self.t, replicates=self.replicates, seeds=self.seeds,
                                   direction_bins=len(self.radii), min_radius=float(self.radii.min()),
                                   max_radius=float(self.radii.max()), csv_path=csv_path)


def standard_fpp_vertices(seed: int, t: float, d: int) -> np.ndarray:
    """Vertices of a standard (f = 1) FPP cluster at time ``t``."""
    config = RunConfig(dimension=d, seed=seed, weight=WeightSpec(alpha=0.0),
                       stop_rule=StopRule(kind="time", time=t))
    return np.array(run_fpp(config).final_state.vertices(), dtype=float)


def estimate_mu(replicates: int, t: float, seed: int = 0, direction_bins: int = 64, d: int = 2,
                threads: int = 1, quiet: bool = True) -> EmpiricalNorm:
    """Fatten, rescale by 1/t, bin, average, symmetrize and convexify standard FPP clusters."""
    if t < 50:
        raise PreconditionError(f"estimate_mu needs t >= 50, got {t}")
    if replicates < 1:
        raise PreconditionError("replicates must be positive")
    if d not in (2, 3):
        raise DimensionError(f"estimate_mu supports d=2 and d=3, got d={d}")
    if d == 2 and direction_bins % 8:
        raise PreconditionError("direction_bins must be a multiple of 8 so the bins are lattice symmetric")
    directions = sphere_directions(d, direction_bins)
    clusters = run_replicates(partial(standard_fpp_vertices, t=t, d=d), replicates, seed,
                              threads=threads, desc="mu estimate", quiet=quiet)
    per_replicate = np.array([fattened_boundary_radii(v, directions) / t for v in clusters])
    empty = np.isnan(per_replicate).any(axis=0)
    if empty.any():
        raise InsufficientSampleError(f"{int(empty.sum())} of {direction_bins} direction bins received no "
                                      f"boundary points; use fewer bins or a larger t")
    radii = hull_radii(directions, symmetrize_radii(directions, per_replicate.mean(axis=0)))
    # hull round-off breaks the symmetry at the last bit
    radii = symmetrize_radii(directions, radii)
    estimate = EmpiricalNorm(directions, radii, t, replicates, derive_seeds(seed, replicates))
    logger.info("estimated shape norm from %d clusters at t=%g: radii in [%.4f, %.4f]",
                replicates, t, radii.min(), radii.max())
    return estimate
