"""Alpha-weight functions f(z) = |z|^alpha f0(z/|z|), norms on R^d and their constants.

Every norm and profile exposes two evaluation paths: ``evaluate`` works on
arrays of shape ``(..., d)`` and is what the metric solvers use, ``scalar``
takes a plain coordinate tuple and is what the growth engine calls once per
frontier edge.
"""
import logging
import math
import os
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import ConvexHull, cKDTree

from app.core.errors import ConfigError, DimensionError, DomainError, PreconditionError
from app.core.quadrature import gauss_legendre
from app.lattice import Edge, edge_midpoint
from app.models.weights import (
    LambdaReport,
    LipschitzReport,
    NormSpec,
    ProfileSpec,
    ShapeConstants,
    TableSpec,
    WeightSpec,
)

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


def sphere_directions(d: int, count: int) -> np.ndarray:
    """Deterministic, roughly uniform unit directions in R^d."""
    if d == 1:
        return np.array([[1.0], [-1.0]])
    if d == 2:
        theta = TWO_PI * np.arange(count) / count
        return np.column_stack([np.cos(theta), np.sin(theta)])
    if d == 3:
        # Fibonacci sphere
        k = np.arange(count) + 0.5
        z = 1.0 - 2.0 * k / count
        phi = math.pi * (3.0 - math.sqrt(5.0)) * k
        r = np.sqrt(1.0 - z * z)
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    pts = np.random.default_rng(0).standard_normal((count, d))
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def _unit_rows(points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    r = np.linalg.norm(points, axis=-1)
    safe = np.where(r > 0, r, 1.0)
    return points / safe[..., None], r


# ---------------------------------------------------------------------------
# Direction tables
# ---------------------------------------------------------------------------

class SphericalTable:
    """Positive values on the unit sphere, interpolated between tabulated nodes.

    d=2 nodes are angles in radians with piecewise-linear periodic
    interpolation. d=3 nodes are unit directions and queries are
    interpolated barycentrically on the facets of their convex hull.
    """

    def __init__(self, d: int, nodes: np.ndarray, values: np.ndarray):
        if d not in (2, 3):
            raise DimensionError(f"tabulated directions are supported for d=2 and d=3, got {d}")
        values = np.asarray(values, dtype=float)
        if values.size < (3 if d == 2 else 4):
            raise ConfigError("direction table has too few nodes")
        if np.any(values <= 0) or not np.all(np.isfinite(values)):
            raise ConfigError("direction table values must be finite and strictly positive")
        self.d = d
        if d == 2:
            angles = np.mod(np.asarray(nodes, dtype=float).ravel(), TWO_PI)
            order = np.argsort(angles, kind="stable")
            self.nodes = angles[order]
            self.values = values[order]
        else:
            dirs, _ = _unit_rows(np.asarray(nodes, dtype=float).reshape(-1, 3))
            self.nodes = dirs
            self.values = values
            self._hull = ConvexHull(dirs)
            self._normals = self._hull.equations[:, :3]
            self._offsets = -self._hull.equations[:, 3]

    @classmethod
    def from_spec(cls, spec: TableSpec, d: int) -> "SphericalTable":
        if spec.csv_path:
            return cls.from_csv(spec.csv_path)
        if d == 2:
            return cls(2, np.asarray(spec.angles if spec.angles is not None else
                                     [math.atan2(u[1], u[0]) for u in spec.directions]), spec.values)
        return cls(3, np.asarray(spec.directions), spec.values)

    @classmethod
    def from_csv(cls, path: str) -> "SphericalTable":
        """Load a table written by ``to_csv``: header ``# angle,value`` or ``# ux,uy,uz,value``."""
        if not os.path.exists(path):
            raise ConfigError(f"table file not found: {path}", category="config.not_found")
        with open(path, "r") as f:
            header = f.readline().strip()
        columns = [c.strip() for c in header.lstrip("#").split(",")]
        if not header.startswith("#") or columns[-1] != "value":
            raise ConfigError(f"{path}: missing '# angle,value' or '# ux,uy,uz,value' header line")
        data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
        if columns == ["angle", "value"]:
            return cls(2, data[:, 0], data[:, 1])
        if columns == ["ux", "uy", "uz", "value"]:
            return cls(3, data[:, :3], data[:, 3])
        raise ConfigError(f"{path}: unsupported table columns {columns}")

    def to_csv(self, path: str) -> str:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        if self.d == 2:
            rows, header = np.column_stack([self.nodes, self.values]), "angle,value"
        else:
            rows, header = np.column_stack([self.nodes, self.values]), "ux,uy,uz,value"
        np.savetxt(path, rows, delimiter=",", header=header, comments="# ", fmt="%.17g")
        return path

    def evaluate(self, units: np.ndarray) -> np.ndarray:
        units = np.asarray(units, dtype=float)
        flat = units.reshape(-1, self.d)
        if self.d == 2:
            theta = np.mod(np.arctan2(flat[:, 1], flat[:, 0]), TWO_PI)
            out = np.interp(theta, self.nodes, self.values, period=TWO_PI)
        else:
            out = self._barycentric(flat)
        return out.reshape(units.shape[:-1])

    def _barycentric(self, units: np.ndarray) -> np.ndarray:
        # the ray t*u leaves the hull through the facet with the largest n.u / offset
        facet = np.argmax((units @ self._normals.T) / self._offsets, axis=1)
        normals = self._normals[facet]
        t = self._offsets[facet] / np.einsum("ij,ij->i", normals, units)
        hit = units * t[:, None]
        corners = self.nodes[self._hull.simplices[facet]]          # (n, 3, 3)
        weights = np.linalg.solve(np.transpose(corners, (0, 2, 1)), hit[..., None])[..., 0]
        return np.einsum("ij,ij->i", weights, self.values[self._hull.simplices[facet]])

    def extrema(self) -> Tuple[float, float]:
        # piecewise-linear and barycentric interpolants attain their extrema at nodes
        return float(self.values.min()), float(self.values.max())


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------

class Norm:
    """A norm on R^d. ``d`` is None for norms defined in every dimension."""

    kind = "norm"
    d: Optional[int] = None

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def scalar(self, z: Sequence[float]) -> float:
        return float(self.evaluate(np.asarray(z, dtype=float)[None, :])[0])

    def __call__(self, z):
        arr = np.asarray(z, dtype=float)
        if arr.ndim == 1:
            return self.scalar(tuple(arr))
        return self.evaluate(arr)

    def unit_ball_sample(self, u: Sequence[float]) -> float:
        """Distance from 0 to the unit-ball boundary along direction ``u``."""
        u = np.asarray(u, dtype=float)
        return float(np.linalg.norm(u) / self.scalar(tuple(u)))

    def describe(self) -> dict:
        return {"kind": self.kind}


class EuclideanNorm(Norm):
    kind = "euclidean"

    def evaluate(self, points):
        return np.linalg.norm(points, axis=-1)

    def scalar(self, z):
        return math.sqrt(sum(x * x for x in z))


class L1Norm(Norm):
    kind = "l1"

    def evaluate(self, points):
        return np.abs(points).sum(axis=-1)

    def scalar(self, z):
        return sum(abs(x) for x in z)


class LinfNorm(Norm):
    kind = "linf"

    def evaluate(self, points):
        return np.abs(points).max(axis=-1)

    def scalar(self, z):
        return max(abs(x) for x in z)


class BoxNorm(Norm):
    """Gauge of the box with the given per-axis half widths."""

    kind = "box"

    def __init__(self, half_widths: Sequence[float]):
        self.half_widths = tuple(float(w) for w in half_widths)
        self.d = len(self.half_widths)
        self._inv = np.array([1.0 / w for w in self.half_widths])

    def evaluate(self, points):
        return np.abs(points * self._inv).max(axis=-1)

    def scalar(self, z):
        return max(abs(x) / w for x, w in zip(z, self.half_widths))

    def describe(self):
        return {"kind": self.kind, "half_widths": list(self.half_widths)}


class TabulatedNorm(Norm):
    """Norm whose unit-ball boundary radius is tabulated by direction."""

    kind = "tabulated"

    def __init__(self, table: SphericalTable):
        self.table = table
        self.d = table.d

    def evaluate(self, points):
        units, r = _unit_rows(points)
        return r / self.table.evaluate(units)

    def describe(self):
        return {"kind": self.kind, "nodes": int(self.table.values.size)}


class ScaledNorm(Norm):
    """c * base."""

    def __init__(self, base: Norm, factor: float):
        self.base = base
        self.factor = float(factor)
        self.kind = base.kind
        self.d = base.d

    def evaluate(self, points):
        return self.factor * self.base.evaluate(points)

    def scalar(self, z):
        return self.factor * self.base.scalar(z)

    def describe(self):
        return {**self.base.describe(), "scale": self.factor}


def build_norm(spec: NormSpec, d: Optional[int] = None) -> Norm:
    """Runtime norm for a validated ``NormSpec``."""
    if spec.kind == "euclidean":
        norm = EuclideanNorm()
    elif spec.kind == "l1":
        norm = L1Norm()
    elif spec.kind == "linf":
        norm = LinfNorm()
    elif spec.kind == "box":
        norm = BoxNorm(spec.half_widths)
    elif spec.kind == "tabulated":
        norm = TabulatedNorm(SphericalTable.from_spec(spec.table, d or 2))
    else:
        from app.geometry import CylinderNorm

        cross = build_norm(spec.cross_section, None) if spec.cross_section else EuclideanNorm()
        norm = CylinderNorm(spec.axis_direction, spec.axis_halfheight, cross, spec.aspect)
    if d is not None and norm.d is not None and norm.d != d:
        raise ConfigError(f"{spec.kind} norm is {norm.d}-dimensional but the run has d={d}")
    if spec.scale != 1.0:
        norm = ScaledNorm(norm, spec.scale)
    return norm


# ---------------------------------------------------------------------------
# Sphere profiles
# ---------------------------------------------------------------------------

class SphereProfile:
    """f0 restricted to the Euclidean unit sphere."""

    kind = "profile"

    def evaluate(self, units: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def scalar(self, u: Sequence[float]) -> float:
        return float(self.evaluate(np.asarray(u, dtype=float)[None, :])[0])

    def extrema(self, d: int, resolution: int) -> Tuple[float, float]:
        lo, hi, _, _ = extremize_on_sphere(self.evaluate, d, resolution)
        return lo, hi

    def describe(self) -> dict:
        return {"kind": self.kind}


class ConstantProfile(SphereProfile):
    kind = "constant"

    def __init__(self, value: float = 1.0):
        if value <= 0:
            raise ConfigError("constant profile must be strictly positive")
        self.value = float(value)

    def evaluate(self, units):
        return np.full(np.asarray(units).shape[:-1], self.value)

    def scalar(self, u):
        return self.value

    def extrema(self, d, resolution):
        return self.value, self.value

    def describe(self):
        return {"kind": self.kind, "value": self.value}


class NormPowerProfile(SphereProfile):
    """f0(u) = nu(u)^power."""

    kind = "norm_power"

    def __init__(self, norm: Norm, power: float):
        self.norm = norm
        self.power = float(power)

    def evaluate(self, units):
        return self.norm.evaluate(units) ** self.power

    def scalar(self, u):
        return self.norm.scalar(u) ** self.power

    def describe(self):
        return {"kind": self.kind, "norm": self.norm.describe(), "power": self.power}


class NormRatioProfile(SphereProfile):
    """f0(u) = (nu1(u) / nu2(u))^power."""

    kind = "norm_ratio"

    def __init__(self, numerator: Norm, denominator: Norm, power: float):
        self.numerator = numerator
        self.denominator = denominator
        self.power = float(power)

    def evaluate(self, units):
        return (self.numerator.evaluate(units) / self.denominator.evaluate(units)) ** self.power

    def scalar(self, u):
        return (self.numerator.scalar(u) / self.denominator.scalar(u)) ** self.power

    def describe(self):
        return {"kind": self.kind, "numerator": self.numerator.describe(),
                "denominator": self.denominator.describe(), "power": self.power}


class TabulatedProfile(SphereProfile):
    kind = "tabulated"

    def __init__(self, table: SphericalTable):
        self.table = table

    def evaluate(self, units):
        return self.table.evaluate(units)

    def extrema(self, d, resolution):
        return self.table.extrema()

    def describe(self):
        return {"kind": self.kind, "nodes": int(self.table.values.size)}


def build_profile(spec: ProfileSpec, d: int, alpha: float) -> SphereProfile:
    if spec.kind == "constant":
        return ConstantProfile(spec.value)
    if spec.kind == "norm_power":
        power = alpha if spec.power is None else spec.power
        return NormPowerProfile(build_norm(spec.norm, d), power)
    if spec.kind == "norm_ratio":
        denominator = build_norm(spec.denominator, d) if spec.denominator else EuclideanNorm()
        power = 1.0 if spec.power is None else spec.power
        return NormRatioProfile(build_norm(spec.norm, d), denominator, power)
    return TabulatedProfile(SphericalTable.from_spec(spec.table, d))


# ---------------------------------------------------------------------------
# Alpha-weight functions
# ---------------------------------------------------------------------------

class AlphaWeightFunction:
    """f(z) = |z|^alpha f0(z/|z|), positively homogeneous of degree alpha."""

    def __init__(self, alpha: float, profile: Optional[SphereProfile] = None, d: int = 2,
                 lipschitz_bound: Optional[float] = None, resolution: int = 4096):
        self.alpha = float(alpha)
        self.profile = profile if profile is not None else ConstantProfile(1.0)
        self.d = d
        self.resolution = resolution
        self.declared_lipschitz = lipschitz_bound
        self._extrema: Optional[Tuple[float, float]] = None
        self._lipschitz: Optional[float] = lipschitz_bound
        self.scalar = self._scalar_evaluator()

    @classmethod
    def from_spec(cls, spec: WeightSpec, d: int) -> "AlphaWeightFunction":
        return cls(spec.alpha, build_profile(spec.profile, d, spec.alpha), d=d,
                   lipschitz_bound=spec.lipschitz_bound)

    @property
    def is_constant_profile(self) -> bool:
        return isinstance(self.profile, ConstantProfile)

    @property
    def kappa_upper(self) -> float:
        return self._profile_extrema()[1]

    @property
    def kappa_lower(self) -> float:
        return self._profile_extrema()[0]

    @property
    def lipschitz_bound(self) -> float:
        if self._lipschitz is None:
            self._lipschitz = estimate_profile_lipschitz(self.profile, self.d)
        return self._lipschitz

    def _profile_extrema(self) -> Tuple[float, float]:
        if self._extrema is None:
            lo, hi = self.profile.extrema(self.d, self.resolution)
            if lo <= 0:
                raise ConfigError("weight profile must be strictly positive on the sphere")
            self._extrema = (lo, hi)
        return self._extrema

    def _scalar_evaluator(self) -> Callable[[Sequence[float]], float]:
        alpha = self.alpha
        half = 0.5 * alpha
        sqrt = math.sqrt
        if isinstance(self.profile, ConstantProfile):
            c = self.profile.value
            if alpha == 0.0:
                return lambda z: c
            return lambda z: c * sum(x * x for x in z) ** half
        profile = self.profile.scalar

        def evaluate(z):
            r = sqrt(sum(x * x for x in z))
            return r ** alpha * profile(tuple(x / r for x in z))

        return evaluate

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        units, r = _unit_rows(points)
        if np.any(r == 0):
            raise DomainError("f is undefined at the origin")
        return r ** self.alpha * self.profile.evaluate(units)

    def __call__(self, z):
        return evaluate_f(self, z)

    def describe(self) -> dict:
        return {"alpha": self.alpha, "profile": self.profile.describe(), "d": self.d}


def build_weight(spec: WeightSpec, d: int) -> AlphaWeightFunction:
    return AlphaWeightFunction.from_spec(spec, d)


def evaluate_f(f: AlphaWeightFunction, z: Sequence[float]) -> float:
    z = tuple(float(x) for x in np.asarray(z, dtype=float).ravel())
    if not any(z):
        raise DomainError("f is undefined at the origin")
    return f.scalar(z)


def edge_weight(f: AlphaWeightFunction, e: Edge) -> float:
    """wt(e) = f(m_e)."""
    return f.scalar(edge_midpoint(e))


# ---------------------------------------------------------------------------
# Extremal constants
# ---------------------------------------------------------------------------

def _angles_to_units(d: int, params: np.ndarray) -> np.ndarray:
    if d == 2:
        return np.array([math.cos(params[0]), math.sin(params[0])])
    theta, phi = params
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])


def _refine(func: Callable[[np.ndarray], np.ndarray], d: int, start: np.ndarray,
            step: float, sign: float) -> Tuple[float, np.ndarray]:
    """Local refinement of sign*func around a grid direction (golden section in d=2)."""
    if d == 2:
        theta0 = math.atan2(start[1], start[0])
        res = minimize_scalar(lambda t: -sign * float(func(_angles_to_units(2, [t])[None])[0]),
                              bounds=(theta0 - step, theta0 + step), method="bounded",
                              options={"xatol": 1e-8})
        return -sign * res.fun, _angles_to_units(2, [res.x])
    theta0, phi0 = math.acos(max(-1.0, min(1.0, start[2]))), math.atan2(start[1], start[0])
    res = minimize(lambda p: -sign * float(func(_angles_to_units(3, p)[None])[0]),
                   x0=np.array([theta0, phi0]), method="Nelder-Mead",
                   options={"xatol": 1e-8, "fatol": 1e-14, "initial_simplex":
                            np.array([[theta0, phi0], [theta0 + step, phi0], [theta0, phi0 + step]])})
    return -sign * res.fun, _angles_to_units(3, res.x)


def extremize_on_sphere(func: Callable[[np.ndarray], np.ndarray], d: int, count: int):
    """(min, max, argmin direction, argmax direction) of a vectorized function on the sphere."""
    grid = sphere_directions(d, count)
    values = func(grid)
    i_lo, i_hi = int(np.argmin(values)), int(np.argmax(values))
    lo, hi = float(values[i_lo]), float(values[i_hi])
    u_lo, u_hi = grid[i_lo], grid[i_hi]
    if d in (2, 3):
        step = TWO_PI / count if d == 2 else 4.0 / math.sqrt(count)
        hi_ref, u_ref = _refine(func, d, u_hi, step, 1.0)
        if hi_ref > hi:
            hi, u_hi = hi_ref, u_ref
        lo_ref, u_ref = _refine(func, d, u_lo, step, -1.0)
        if lo_ref < lo:
            lo, u_lo = lo_ref, u_ref
    return lo, hi, u_lo, u_hi


def compute_shape_constants(mu: Norm, direction_count: int = 1024, d: Optional[int] = None) -> ShapeConstants:
    """rho_upper = sup |u|/mu(u) and rho_lower = inf |u|/mu(u) over unit directions."""
    if direction_count < 64:
        raise PreconditionError(f"direction_count must be at least 64, got {direction_count}")
    d = d or mu.d or 2
    ratio = lambda units: 1.0 / mu.evaluate(units)
    lo, hi, _, u_hi = extremize_on_sphere(ratio, d, direction_count)
    grid = sphere_directions(d, direction_count)
    values = ratio(grid)
    maximizers = grid[values >= hi * (1.0 - 1e-6)]
    if maximizers.size == 0:
        maximizers = u_hi[None, :]
    return ShapeConstants(rho_upper=hi, rho_lower=lo, maximizer_directions=maximizers.tolist(),
                          direction_count=direction_count)


def estimate_profile_lipschitz(profile: SphereProfile, d: int, count: int = 4096) -> float:
    """Largest ratio |f0(u)-f0(v)|/|u-v| over nearby grid directions, with a 1% margin."""
    if isinstance(profile, ConstantProfile) or d == 1:
        return 0.0
    grid = sphere_directions(d, count)
    values = profile.evaluate(grid)
    _, idx = cKDTree(grid).query(grid, k=min(7, count))
    diffs = np.linalg.norm(grid[:, None, :] - grid[idx], axis=-1)[:, 1:]
    jumps = np.abs(values[:, None] - values[idx])[:, 1:]
    ratios = np.where(diffs > 0, jumps / np.where(diffs > 0, diffs, 1.0), 0.0)
    return 1.01 * float(ratios.max())


def check_lipschitz(f: AlphaWeightFunction, sample_count: int = 10_000, seed: int = 0) -> LipschitzReport:
    """Empirical Lipschitz ratio of f0 plus the full-space continuity bound of f.

    With L the profile's Lipschitz bound the full-space bound holds with
    a = |alpha| * kappa_upper + 2L:
    |f(z) - f(w)| <= a * max(|z|^(alpha-1), |w|^(alpha-1)) * |z - w|.
    """
    if sample_count < 1000:
        raise PreconditionError(f"sample_count must be at least 1000, got {sample_count}")
    d = f.d
    rng = np.random.default_rng(seed)
    u, _ = _unit_rows(rng.standard_normal((sample_count, d)))
    eps = 10.0 ** rng.uniform(-4.0, 0.0, size=sample_count)
    v, _ = _unit_rows(u + eps[:, None] * rng.standard_normal((sample_count, d)))
    gaps = np.linalg.norm(u - v, axis=1)
    keep = gaps > 0
    jumps = np.abs(f.profile.evaluate(u) - f.profile.evaluate(v))
    max_ratio = float((jumps[keep] / gaps[keep]).max()) if keep.any() else 0.0

    bound = f.declared_lipschitz if f.declared_lipschitz is not None else max(f.lipschitz_bound, max_ratio)
    a = abs(f.alpha) * f.kappa_upper + 2.0 * bound

    radii = 10.0 ** rng.uniform(-1.0, 1.0, size=(sample_count, 2))
    z = rng.standard_normal((sample_count, d))
    w = rng.standard_normal((sample_count, d))
    z = _unit_rows(z)[0] * radii[:, :1]
    w = _unit_rows(w)[0] * radii[:, 1:]
    lhs = np.abs(f.evaluate(z) - f.evaluate(w))
    scale = np.maximum(radii[:, 0] ** (f.alpha - 1.0), radii[:, 1] ** (f.alpha - 1.0))
    rhs = a * scale * np.linalg.norm(z - w, axis=1)
    violations = int(np.count_nonzero(lhs > rhs * (1.0 + 1e-9) + 1e-12))

    passed = violations == 0
    if f.declared_lipschitz is not None:
        passed = passed and max_ratio <= f.declared_lipschitz * (1.0 + 1e-6)
    if not passed:
        logger.warning("Lipschitz check failed: ratio %.6g, declared %s, %d full-space violations",
                       max_ratio, f.declared_lipschitz, violations)
    return LipschitzReport(samples=sample_count, seed=seed, max_ratio=max_ratio,
                           declared_bound=f.declared_lipschitz, lipschitz_constant_a=a,
                           full_space_violations=violations, passed=passed)


# ---------------------------------------------------------------------------
# Lambda: half the D-circumference of the Euclidean unit sphere
# ---------------------------------------------------------------------------

def segment_d_lengths(f: AlphaWeightFunction, mu: Norm, starts: np.ndarray, ends: np.ndarray,
                      quad_nodes: int) -> np.ndarray:
    """mu(b - a) * int_0^1 f(a + t(b - a))^-1 dt for each segment, Gauss-Legendre."""
    t, w = gauss_legendre(quad_nodes)
    delta = ends - starts
    samples = starts[:, None, :] + t[None, :, None] * delta[:, None, :]
    inverse = 1.0 / f.evaluate(samples)
    return mu.evaluate(delta) * (inverse @ w)


def _sphere_graph_diameter(f: AlphaWeightFunction, mu: Norm, resolution: int, quad_nodes: int) -> float:
    d = f.d
    nodes = sphere_directions(d, resolution)
    if d == 2:
        a = np.arange(resolution)
        pairs = np.column_stack([a, (a + 1) % resolution])
        sources = a
    else:
        simplices = ConvexHull(nodes).simplices
        pairs = np.concatenate([simplices[:, [0, 1]], simplices[:, [1, 2]], simplices[:, [0, 2]]])
        pairs = np.unique(np.sort(pairs, axis=1), axis=0)
        sources = np.linspace(0, resolution - 1, num=min(64, resolution)).astype(int)
    costs = segment_d_lengths(f, mu, nodes[pairs[:, 0]], nodes[pairs[:, 1]], quad_nodes)
    graph = coo_matrix((costs, (pairs[:, 0], pairs[:, 1])), shape=(resolution, resolution)).tocsr()
    dist = dijkstra(graph, directed=False, indices=sources)
    return float(dist.max())


def compute_lambda(f: AlphaWeightFunction, mu: Norm, sphere_resolution: int = 1024,
                   quad_nodes: int = 16, extrapolate: bool = True) -> LambdaReport:
    """Richardson-extrapolated sphere diameter over resolutions n, n/2, n/4."""
    if f.d not in (2, 3):
        raise DimensionError(f"lambda is computed for d=2 and d=3 only, got d={f.d}")
    if sphere_resolution < 128:
        raise PreconditionError(f"sphere_resolution must be at least 128, got {sphere_resolution}")
    quad_nodes = max(16, quad_nodes)
    resolutions = [sphere_resolution, sphere_resolution // 2, sphere_resolution // 4]
    raw = [_sphere_graph_diameter(f, mu, n, quad_nodes) for n in resolutions]
    if extrapolate:
        # chord error is O(h^2); halving the node count doubles h (d=2) or h^2 (d=3)
        k = 4.0 if f.d == 2 else 2.0
        fine = (k * raw[0] - raw[1]) / (k - 1.0)
        coarse = (k * raw[1] - raw[2]) / (k - 1.0)
    else:
        fine, coarse = raw[0], raw[1]
    logger.debug("lambda raw values %s -> %.10g", raw, fine)
    return LambdaReport(value=fine, error_estimate=abs(fine - coarse), resolutions=resolutions,
                        raw_values=raw, quadrature_nodes=quad_nodes)
