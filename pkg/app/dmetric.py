"""Numerical realization of the weighted metric D.

The D-length of a path is the integral of 1/f against mu-length. Distances
come from Dijkstra on ``GeodesicGrid``, a grid graph whose edges are straight
chords of a lattice stencil costed by Gauss-Legendre quadrature. A grid
distance is the D-length of an actual piecewise-linear path, so it
over-approximates D; the over-approximation is bounded by the stencil's
anisotropy factor plus the endpoint snap segments.
"""
import csv
import logging
import math
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import ConvexHull, cKDTree

from app.core.errors import (
    ConfigError,
    DimensionError,
    DisconnectedDomainError,
    DomainError,
    PreconditionError,
    SingularityError,
)
from app.models.metric import DBallReport, GridParameters, SandwichReport, ScalingReport, TubeBounds
from app.models.weights import ShapeConstants
from app.weights import (
    AlphaWeightFunction,
    EuclideanNorm,
    Norm,
    compute_shape_constants,
    segment_d_lengths,
    sphere_directions,
)

logger = logging.getLogger(__name__)

GRID_QUAD_NODES = 8
SNAP_QUAD_NODES = 32
_CHUNK_SAMPLES = 4_000_000
_SEED_OFFSET = 1.0


class PLPath:
    """Piecewise-linear path, parametrized by mu-length when integrated."""

    def __init__(self, vertices: Sequence[Sequence[float]]):
        pts = np.asarray(vertices, dtype=float)
        if pts.ndim != 2 or len(pts) < 2:
            raise DomainError("a path needs at least two vertices")
        if np.any(np.all(pts[1:] == pts[:-1], axis=1)):
            raise DomainError("consecutive path vertices must be distinct")
        self.vertices = pts

    def segments(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.vertices[:-1], self.vertices[1:]

    def mu_length(self, mu: Norm) -> float:
        return float(mu.evaluate(np.diff(self.vertices, axis=0)).sum())


def radial_from_origin(f: AlphaWeightFunction, mu: Norm, points: np.ndarray) -> np.ndarray:
    """D-length of the straight segment from 0 to each point; needs alpha < 1.

    Along the ray the integrand is (s|p|/mu(p))^-alpha / f0(p/|p|) in mu-length
    s, which integrates to mu(p) |p|^-alpha / (f0(p/|p|) (1 - alpha)).
    """
    if f.alpha >= 1:
        raise SingularityError(f"1/f is not integrable at the origin for alpha={f.alpha}")
    points = np.asarray(points, dtype=float)
    r = np.linalg.norm(points, axis=-1)
    units = points / np.where(r > 0, r, 1.0)[..., None]
    return mu.evaluate(points) * r ** (-f.alpha) / (f.profile.evaluate(units) * (1.0 - f.alpha))


def _segment_d_length(f: AlphaWeightFunction, mu: Norm, a: np.ndarray, b: np.ndarray, quad_nodes: int) -> float:
    delta = b - a
    length2 = float(delta @ delta)
    t_star = -float(a @ delta) / length2
    closest = a + min(1.0, max(0.0, t_star)) * delta
    dist0 = float(np.linalg.norm(closest))
    scale = max(np.linalg.norm(a), np.linalg.norm(b))
    if dist0 <= 1e-14 * scale:
        # the segment touches the origin: split there and integrate both radial pieces exactly
        if f.alpha >= 1:
            raise SingularityError(f"segment {a.tolist()} -> {b.tolist()} passes through 0 with alpha={f.alpha}")
        ends = [p for p in (a, b) if np.linalg.norm(p) > 1e-14 * scale]
        return float(radial_from_origin(f, mu, np.array(ends)).sum()) if ends else 0.0
    panels = int(min(256, max(1, math.ceil(4.0 * math.sqrt(length2) / dist0))))
    knots = np.linspace(0.0, 1.0, panels + 1)
    starts = a + knots[:-1, None] * delta
    ends = a + knots[1:, None] * delta
    return float(segment_d_lengths(f, mu, starts, ends, quad_nodes).sum())


def d_length(path: PLPath, f: AlphaWeightFunction, mu: Norm, quad_nodes: int = GRID_QUAD_NODES) -> float:
    """Composite Gauss-Legendre D-length; panels refine towards the origin."""
    if quad_nodes < 8:
        raise PreconditionError(f"quad_nodes must be at least 8, got {quad_nodes}")
    starts, ends = path.segments()
    return math.fsum(_segment_d_length(f, mu, a, b, quad_nodes) for a, b in zip(starts, ends))


# ---------------------------------------------------------------------------
# Stencils
# ---------------------------------------------------------------------------

def stencil_offsets(d: int, reach: int) -> np.ndarray:
    """Primitive integer steps with max-norm <= reach, one of each +/- pair.

    d=2: reach 2 gives the 16-neighbour stencil, reach 3 the 32-neighbour
    and reach 4 the 48-neighbour one. d=3 reach 1 is the 26-neighbour stencil.
    """
    axes = [np.arange(-reach, reach + 1)] * d
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    grid = grid[np.any(grid != 0, axis=1)]
    primitive = np.gcd.reduce(np.abs(grid), axis=1) == 1
    grid = grid[primitive]
    first_nonzero = grid[np.arange(len(grid)), np.argmax(grid != 0, axis=1)]
    return grid[first_nonzero > 0]


def stencil_anisotropy(mu: Norm, d: int, reach: int, samples: int = 4096) -> float:
    """Worst ratio of the cheapest stencil combination to the straight mu-length.

    In d=2 a direction between two adjacent stencil directions e1, e2 is
    a*e1 + b*e2 with a, b >= 0, costing a*mu(e1) + b*mu(e2). For d=3 the
    Euclidean in-plane bound 1/cos(pi/8) of the 26-neighbour stencil is used.
    """
    if d == 1:
        return 1.0
    if d == 3:
        return 1.0 / math.cos(math.pi / 8.0)
    half = stencil_offsets(2, reach).astype(float)
    full = np.concatenate([half, -half])
    angles = np.mod(np.arctan2(full[:, 1], full[:, 0]), 2.0 * math.pi)
    order = np.argsort(angles)
    full, angles = full[order], angles[order]
    theta = 2.0 * math.pi * (np.arange(samples) + 0.5) / samples
    hi = np.searchsorted(angles, theta) % len(angles)
    lo = (hi - 1) % len(angles)
    v = np.column_stack([np.cos(theta), np.sin(theta)])
    basis = np.stack([full[lo], full[hi]], axis=-1)
    coeffs = np.linalg.solve(basis, v[..., None])[..., 0]
    cost = coeffs[:, 0] * mu.evaluate(full[lo]) + coeffs[:, 1] * mu.evaluate(full[hi])
    return float((cost / mu.evaluate(v)).max())


# ---------------------------------------------------------------------------
# Regions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Region:
    """Closed region {r_in <= norm(z) <= r_out}; the norm defaults to Euclidean."""
    r_in: float = 0.0
    r_out: float = math.inf
    norm: Optional[Norm] = None

    def __call__(self, points: np.ndarray) -> np.ndarray:
        norm = self.norm or EuclideanNorm()
        values = norm.evaluate(np.asarray(points, dtype=float))
        slack = 1e-9 * max(1.0, self.r_in)
        return (values >= self.r_in - slack) & (values <= self.r_out * (1.0 + 1e-12))

    def describe(self) -> dict:
        return {"r_in": self.r_in, "r_out": self.r_out,
                "norm": (self.norm or EuclideanNorm()).describe()}


# ---------------------------------------------------------------------------
# Grid graph
# ---------------------------------------------------------------------------

class GeodesicGrid:
    """Weighted stencil graph on the points h*Z^d of a box.

    Nodes closer to 0 than max(h/2, exclude_radius), and nodes outside an
    optional region, are dropped. Chords passing within h/2 of the origin are
    dropped too, so quadrature never samples 0.
    """

    def __init__(self, f: AlphaWeightFunction, mu: Norm, step: float,
                 lower: Sequence[float], upper: Sequence[float], *,
                 reach: Optional[int] = None, exclude_radius: float = 0.0,
                 region: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                 quad_nodes: int = GRID_QUAD_NODES, snap_quad_nodes: int = SNAP_QUAD_NODES):
        d = f.d
        if d not in (1, 2, 3):
            raise DimensionError(f"geodesic grids support d=1..3, got d={d}")
        if step <= 0:
            raise PreconditionError("grid step must be positive")
        self.f, self.mu, self.d, self.step = f, mu, d, float(step)
        self.reach = reach if reach is not None else (2 if d == 2 else 1)
        if d == 3 and self.reach != 1:
            raise ConfigError("d=3 grids use the 26-neighbour stencil (reach 1)")
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        self.exclude_radius = float(exclude_radius)
        self.region = region
        self.quad_nodes = quad_nodes
        self.snap_quad_nodes = snap_quad_nodes
        h = self.step

        self._lo_idx = np.floor(self.lower / h + 1e-9).astype(np.int64)
        hi_idx = np.ceil(self.upper / h - 1e-9).astype(np.int64)
        shape = tuple(int(n) for n in hi_idx - self._lo_idx + 1)
        int_coords = np.indices(shape).reshape(d, -1).T + self._lo_idx
        pts = int_coords * h
        keep = np.linalg.norm(pts, axis=1) >= max(0.5 * h, self.exclude_radius)
        if region is not None:
            keep &= region(pts)
        ids = np.full(len(pts), -1, dtype=np.int64)
        ids[keep] = np.arange(int(keep.sum()))
        self._ids = ids.reshape(shape)
        self.nodes = pts[keep]

        rows, cols = [], []
        for off in stencil_offsets(d, self.reach):
            src = tuple(slice(max(0, -o), n - max(0, o)) for o, n in zip(off, shape))
            dst = tuple(slice(max(0, o), n - max(0, -o)) for o, n in zip(off, shape))
            a = self._ids[src].ravel()
            b = self._ids[dst].ravel()
            ok = (a >= 0) & (b >= 0)
            rows.append(a[ok])
            cols.append(b[ok])
        rows = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
        cols = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
        A, B = self.nodes[rows], self.nodes[cols]
        delta = B - A
        t = np.clip(-np.einsum("ij,ij->i", A, delta) / np.einsum("ij,ij->i", delta, delta), 0.0, 1.0)
        clear = np.linalg.norm(A + t[:, None] * delta, axis=1) >= 0.5 * h * (1.0 - 1e-12)
        self._rows, self._cols = rows[clear], cols[clear]
        self._costs = self._chord_costs(self.nodes[self._rows], self.nodes[self._cols], quad_nodes)
        n = len(self.nodes)
        self.graph = coo_matrix((self._costs, (self._rows, self._cols)), shape=(n, n)).tocsr()
        logger.debug("grid h=%g nodes=%d edges=%d", h, n, len(self._costs))

    @classmethod
    def around(cls, f: AlphaWeightFunction, mu: Norm, points: Sequence[Sequence[float]], step: float,
               margin: Optional[float] = None, **kwargs) -> "GeodesicGrid":
        """Grid over the bounding box of ``points`` widened by ``margin``."""
        pts = np.asarray(points, dtype=float).reshape(-1, f.d)
        extent = float((pts.max(axis=0) - pts.min(axis=0)).max())
        if margin is None:
            margin = max(4.0 * step, 0.5 * extent) + 4.0 * step
        return cls(f, mu, step, pts.min(axis=0) - margin, pts.max(axis=0) + margin, **kwargs)

    def restricted(self, region: Callable[[np.ndarray], np.ndarray]) -> "GeodesicGrid":
        """Same lattice and box, nodes further restricted to ``region``."""
        base = self.region
        combined = region if base is None else (lambda pts: base(pts) & region(pts))
        return GeodesicGrid(self.f, self.mu, self.step, self.lower, self.upper, reach=self.reach,
                            exclude_radius=self.exclude_radius, region=combined,
                            quad_nodes=self.quad_nodes, snap_quad_nodes=self.snap_quad_nodes)

    def _chord_costs(self, starts: np.ndarray, ends: np.ndarray, quad_nodes: int) -> np.ndarray:
        chunk = max(1, _CHUNK_SAMPLES // (quad_nodes * self.d))
        out = np.empty(len(starts))
        for i in range(0, len(starts), chunk):
            out[i:i + chunk] = segment_d_lengths(self.f, self.mu, starts[i:i + chunk], ends[i:i + chunk], quad_nodes)
        return out

    @cached_property
    def anisotropy_factor(self) -> float:
        return stencil_anisotropy(self.mu, self.d, self.reach)

    @cached_property
    def _tree(self) -> cKDTree:
        return cKDTree(self.nodes)

    def parameters(self) -> GridParameters:
        return GridParameters(step=self.step, stencil_size=2 * len(stencil_offsets(self.d, self.reach)),
                              anisotropy_factor=self.anisotropy_factor, quad_nodes=self.quad_nodes,
                              snap_quad_nodes=self.snap_quad_nodes, node_count=len(self.nodes),
                              edge_count=len(self._costs))

    def node_ids_of(self, points: np.ndarray) -> np.ndarray:
        """Node id of each lattice point given in grid-index coordinates, -1 when absent."""
        idx = np.asarray(points, dtype=np.int64) - self._lo_idx
        inside = np.all((idx >= 0) & (idx < np.array(self._ids.shape)), axis=-1)
        out = np.full(idx.shape[:-1], -1, dtype=np.int64)
        out[inside] = self._ids[tuple(idx[inside].T)]
        return out

    def snap(self, p: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
        """Nodes within one cell diagonal of ``p`` and the D-lengths of the snap segments."""
        p = np.asarray(p, dtype=float)
        ids = np.array(sorted(self._tree.query_ball_point(p, r=self.step * math.sqrt(self.d) * (1 + 1e-9))),
                       dtype=np.int64)
        if ids.size == 0:
            raise DomainError(f"point {p.tolist()} is outside the grid domain")
        targets = self.nodes[ids]
        costs = np.zeros(len(ids))
        moved = np.any(targets != p, axis=1)
        if moved.any():
            costs[moved] = segment_d_lengths(self.f, self.mu, np.broadcast_to(p, targets[moved].shape),
                                             targets[moved], self.snap_quad_nodes)
        return ids, costs

    def solve(self, seed_ids: np.ndarray, seed_costs: np.ndarray) -> np.ndarray:
        """Distances to every node from a super-source joined to the seeds at the given costs."""
        n = len(self.nodes)
        seed_ids = np.asarray(seed_ids, dtype=np.int64)
        rows = np.concatenate([self._rows, np.full(len(seed_ids), n)])
        cols = np.concatenate([self._cols, seed_ids])
        # csgraph treats explicit zeros as missing edges, so seeds carry a constant offset
        data = np.concatenate([self._costs, np.asarray(seed_costs, dtype=float) + _SEED_OFFSET])
        graph = coo_matrix((data, (rows, cols)), shape=(n + 1, n + 1)).tocsr()
        dist = dijkstra(graph, directed=False, indices=n)
        return dist[:n] - _SEED_OFFSET

    def distance(self, z: Sequence[float], w: Sequence[float]) -> Tuple[float, float]:
        """(grid distance, snap tolerance) between two points of the domain."""
        z = np.asarray(z, dtype=float)
        w = np.asarray(w, dtype=float)
        if np.array_equal(z, w):
            return 0.0, 0.0
        src, src_cost = self.snap(z)
        dst, dst_cost = self.snap(w)
        dist = self.solve(src, src_cost)
        value = float((dist[dst] + dst_cost).min())
        return value, float(src_cost.max() + dst_cost.max())

    def evaluate_from(self, dist: np.ndarray, points: np.ndarray) -> np.ndarray:
        """min over the cell corners c of each point of dist[c] + D-length(c -> point)."""
        points = np.asarray(points, dtype=float)
        base = np.floor(points / self.step).astype(np.int64)
        corners = np.stack(np.meshgrid(*[[0, 1]] * self.d, indexing="ij"), axis=-1).reshape(-1, self.d)
        best = np.full(len(points), np.inf)
        for corner in corners:
            ids = self.node_ids_of(base + corner)
            ok = ids >= 0
            if not ok.any():
                continue
            start = (base[ok] + corner) * self.step
            value = dist[ids[ok]] + segment_d_lengths(self.f, self.mu, start, points[ok], self.quad_nodes)
            best[ok] = np.minimum(best[ok], value)
        return best


def _default_grid(f, mu, points, grid, step) -> GeodesicGrid:
    return grid if grid is not None else GeodesicGrid.around(f, mu, points, step)


def d_distance(z: Sequence[float], w: Sequence[float], f: AlphaWeightFunction, mu: Norm,
               grid: Optional[GeodesicGrid] = None, step: float = 0.05) -> float:
    """Grid approximation of D(z, w), snap segments included."""
    grid = _default_grid(f, mu, [z, w], grid, step)
    return grid.distance(z, w)[0]


def d_distance_restricted(z: Sequence[float], w: Sequence[float], f: AlphaWeightFunction, mu: Norm,
                          domain: Callable[[np.ndarray], np.ndarray],
                          grid: Optional[GeodesicGrid] = None, step: float = 0.05) -> float:
    """D over paths that stay in ``domain``; never below the unrestricted grid distance."""
    pts = np.asarray([z, w], dtype=float)
    if not np.all(domain(pts)):
        raise DomainError("both endpoints must lie in the restriction domain")
    restricted = _default_grid(f, mu, pts, grid, step).restricted(domain)
    value = restricted.distance(z, w)[0]
    if not math.isfinite(value):
        raise DisconnectedDomainError("no grid path joins the endpoints inside the domain")
    return value


def scaling_check(f: AlphaWeightFunction, mu: Norm, z: Sequence[float], w: Sequence[float],
                  r: float, step: float = 0.02) -> ScalingReport:
    """Compare D(rz, rw) with r^(1-alpha) D(z, w) on proportionally scaled grids."""
    if r <= 0:
        raise PreconditionError(f"scale factor must be positive, got {r}")
    pts = np.asarray([z, w], dtype=float)
    extent = float((pts.max(axis=0) - pts.min(axis=0)).max())
    margin = max(4.0 * step, 0.5 * extent) + 4.0 * step
    grid = GeodesicGrid.around(f, mu, pts, step, margin=margin)
    base, _ = grid.distance(pts[0], pts[1])
    scaled_grid = GeodesicGrid.around(f, mu, r * pts, r * step, margin=r * margin)
    scaled, _ = scaled_grid.distance(r * pts[0], r * pts[1])
    predicted = r ** (1.0 - f.alpha) * base
    discrepancy = abs(scaled - predicted) / predicted if predicted > 0 else abs(scaled)
    return ScalingReport(r=r, alpha=f.alpha, distance=base, scaled_distance=scaled, predicted=predicted,
                         relative_discrepancy=discrepancy, grid=grid.parameters())


def comparison_lower_bound(z: np.ndarray, w: np.ndarray, alpha: float, rho_upper: float,
                           kappa_upper: float, mu: Norm) -> Tuple[float, str]:
    """phi(z, w): lower bound on D(z, w) from |z| -/+ rho*t bounds on |gamma(t)|.

    For alpha < 0 the clamp (|z| - rho*t)_+ keeps the bound valid beyond |z|/rho.
    """
    a = float(np.linalg.norm(z))
    m = mu.scalar(tuple(np.asarray(w, dtype=float) - np.asarray(z, dtype=float)))
    rk = rho_upper * kappa_upper
    if alpha == 1.0:
        return math.log((a + rho_upper * m) / a) / rk, "alpha=1"
    if alpha >= 0.0:
        return (a ** (1 - alpha) - (a + rho_upper * m) ** (1 - alpha)) / (rk * (alpha - 1)), "alpha>=0"
    return (a ** (1 - alpha) - max(a - rho_upper * m, 0.0) ** (1 - alpha)) / (rk * (1 - alpha)), "alpha<0"


def sandwich_check(f: AlphaWeightFunction, mu: Norm, z: Sequence[float], w: Sequence[float],
                   step: float = 0.02, grid: Optional[GeodesicGrid] = None,
                   shape_constants: Optional[ShapeConstants] = None) -> SandwichReport:
    """phi(z, w) - tol <= D_grid(z, w) <= straight-segment D-length + tol."""
    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    if not np.any(z) or not np.any(w):
        raise DomainError("sandwich endpoints must differ from the origin")
    consts = shape_constants or compute_shape_constants(mu, 1024, f.d)
    rho, kappa = consts.rho_upper, f.kappa_upper
    phi_zw, branch = comparison_lower_bound(z, w, f.alpha, rho, kappa, mu)
    phi_wz, _ = comparison_lower_bound(w, z, f.alpha, rho, kappa, mu)
    phi = max(phi_zw, phi_wz)
    try:
        upper = d_length(PLPath([z, w]), f, mu, quad_nodes=SNAP_QUAD_NODES)
    except SingularityError:
        upper = math.inf
    grid = _default_grid(f, mu, [z, w], grid, step)
    distance, snap_tol = grid.distance(z, w)
    reference = upper if math.isfinite(upper) else distance
    tolerance = (grid.anisotropy_factor - 1.0) * reference + snap_tol + 1e-9 * reference
    lower_ok = phi - tolerance <= distance
    upper_ok = distance <= upper + tolerance
    if not (lower_ok and upper_ok):
        logger.warning("sandwich violated at z=%s w=%s: phi=%.6g D=%.6g upper=%.6g tol=%.3g",
                       z.tolist(), w.tolist(), phi, distance, upper, tolerance)
    return SandwichReport(alpha=f.alpha, branch=branch, phi=phi, distance=distance, upper=upper,
                          tolerance=tolerance, rho_upper=rho, kappa_upper=kappa,
                          lower_ok=lower_ok, upper_ok=upper_ok, grid=grid.parameters())


# ---------------------------------------------------------------------------
# D-balls
# ---------------------------------------------------------------------------

@dataclass
class DBall:
    radius: float
    directions: np.ndarray
    radii: np.ndarray
    triangles: Optional[np.ndarray] = None
    center_rule: str = ""
    seed_radius: float = 0.0
    outer_bound: float = 0.0
    bisection_tolerance: float = 1e-4
    convex: bool = True
    convexity_defect: float = 0.0
    grid: Optional[GridParameters] = field(default=None, repr=False)

    @property
    def boundary_points(self) -> np.ndarray:
        return self.directions * self.radii[:, None]

    def report(self) -> DBallReport:
        return DBallReport(radius=self.radius, directions=len(self.radii), min_radius=float(self.radii.min()),
                           max_radius=float(self.radii.max()), convex=self.convex,
                           convexity_defect=self.convexity_defect, center_rule=self.center_rule,
                           seed_radius=self.seed_radius, outer_bound=self.outer_bound,
                           bisection_tolerance=self.bisection_tolerance, grid=self.grid)

    def to_csv(self, path: str) -> str:
        """Boundary as ``ux,uy[,uz],r`` rows."""
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        d = self.directions.shape[1]
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["ux", "uy", "uz"][:d] + ["r"])
            for u, r in zip(self.directions, self.radii):
                writer.writerow([repr(float(x)) for x in u] + [repr(float(r))])
        return path

    @classmethod
    def from_csv(cls, path: str, radius: float = float("nan")) -> "DBall":
        if not os.path.exists(path):
            raise ConfigError(f"D-ball file not found: {path}", category="config.not_found")
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        if not rows or rows[0][-1] != "r":
            raise ConfigError(f"{path}: not a D-ball boundary CSV")
        data = np.array([[float(x) for x in row] for row in rows[1:]])
        return cls(radius=radius, directions=data[:, :-1], radii=data[:, -1])


def convexity_defect(points: np.ndarray) -> float:
    """Largest depth of a boundary point inside the convex hull of all of them."""
    hull = ConvexHull(points)
    offsets = points @ hull.equations[:, :-1].T + hull.equations[:, -1]
    return float(max(0.0, -offsets.max(axis=1).min()))


def trace_d_ball(f: AlphaWeightFunction, mu: Norm, radius: float, angular_resolution: int = 256, *,
                 step: Optional[float] = None, reach: Optional[int] = None, seed_multiple: float = 10.0,
                 tolerance: float = 1e-4, max_iterations: int = 60,
                 shape_constants: Optional[ShapeConstants] = None) -> DBall:
    """Boundary radius r(u) with D(0, r(u) u) = radius for each direction u.

    D(0, .) is the exact radial integral inside the seed shell |x| < r0 and a
    grid solve from the shell outside it. Every boundary point lies within
    R = (radius (1-alpha) rho kappa)^(1/(1-alpha)), the radius at which the
    comparison lower bound alone reaches ``radius``.
    """
    if f.alpha >= 1:
        raise PreconditionError(f"D-balls around 0 are finite only for alpha < 1, got alpha={f.alpha}")
    d = f.d
    if d not in (2, 3):
        raise DimensionError(f"D-balls are traced for d=2 and d=3, got d={d}")
    if radius <= 0:
        raise PreconditionError("radius must be positive")
    consts = shape_constants or compute_shape_constants(mu, 1024, d)
    outer = (radius * (1.0 - f.alpha) * consts.rho_upper * f.kappa_upper) ** (1.0 / (1.0 - f.alpha))
    step = step or outer / (100.0 if d == 2 else 30.0)
    reach = reach or (4 if d == 2 else 1)
    r0 = seed_multiple * step
    bound = 1.05 * outer + 2.0 * step
    grid = GeodesicGrid(f, mu, step, [-bound] * d, [bound] * d, reach=reach, exclude_radius=r0)
    shell = np.flatnonzero(np.linalg.norm(grid.nodes, axis=1) < r0 + 3.0 * step)
    dist = grid.solve(shell, radial_from_origin(f, mu, grid.nodes[shell]))

    directions = sphere_directions(d, angular_resolution)
    lo = np.zeros(len(directions))
    hi = np.full(len(directions), outer)
    for _ in range(max_iterations):
        mid = 0.5 * (lo + hi)
        pts = mid[:, None] * directions
        value = np.minimum(radial_from_origin(f, mu, pts), grid.evaluate_from(dist, pts))
        inside = value < radius
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
        if (hi - lo).max() < tolerance:
            break
    radii = 0.5 * (lo + hi)
    points = directions * radii[:, None]
    defect = convexity_defect(points)
    triangles = ConvexHull(directions).simplices if d == 3 else None
    ball = DBall(radius=radius, directions=directions, radii=radii, triangles=triangles,
                 center_rule=f"exact radial integral for |x| < {r0 + 3.0 * step:.6g}, grid solve beyond",
                 seed_radius=r0, outer_bound=outer, bisection_tolerance=tolerance,
                 convex=defect <= max(2.0 * tolerance, 1e-3 * float(radii.max())),
                 convexity_defect=defect, grid=grid.parameters())
    logger.info("traced D-ball radius=%g: r in [%.6g, %.6g], convex=%s", radius, radii.min(), radii.max(), ball.convex)
    return ball


# ---------------------------------------------------------------------------
# Cylinder closed forms
# ---------------------------------------------------------------------------

def _check_cylinder_parameters(q: float, alpha: float) -> None:
    if q <= 1:
        raise PreconditionError(f"q must exceed 1, got {q}")
    if alpha <= 1:
        raise PreconditionError(f"cylinder distances need alpha > 1, got {alpha}")


def cylinder_distance_closed_form(q: float, alpha: float, kappa_upper_s: float) -> float:
    """D between the unit cylinder boundary and its q-scaling: (1 - q^(1-alpha)) / (kappa_s (alpha - 1))."""
    _check_cylinder_parameters(q, alpha)
    if kappa_upper_s <= 0:
        raise PreconditionError("kappa_upper_s must be positive")
    return (1.0 - q ** (1.0 - alpha)) / (kappa_upper_s * (alpha - 1.0))


def tube_distance_bounds(q: float, alpha: float, s: float, zeta: float,
                         kappa_upper_s: float, kappa_lower_s: float) -> TubeBounds:
    """Upper bound to the scaled flat faces and the two lower bounds to the scaled lateral boundary."""
    _check_cylinder_parameters(q, alpha)
    if s <= 1:
        raise PreconditionError(f"aspect s must exceed 1, got {s}")
    if zeta < 0:
        raise PreconditionError("zeta must be non-negative")
    if kappa_upper_s <= 0 or kappa_lower_s <= 0:
        raise PreconditionError("kappa bounds must be positive")
    a1 = alpha - 1.0
    upper = cylinder_distance_closed_form(q, alpha, kappa_upper_s) + 1.0 / kappa_lower_s
    ball_lower = ((1.0 - (q + zeta) ** (1.0 - alpha)) / (kappa_upper_s * a1)
                  + ((s - 1.0) * (q - 1.0) - zeta) / (kappa_upper_s * (q + zeta) ** alpha))
    global_lower = (1.0 + q ** (1.0 - alpha) - 2.0 ** alpha * (q + 1.0 + s * (q - 1.0)) ** (1.0 - alpha)) / (kappa_upper_s * a1)
    return TubeBounds(upper=upper, ball_lower=ball_lower, global_lower=global_lower)
