"""Integer-lattice primitives for Z^d, 1 <= d <= 4.

Vertices are integer tuples and edges are canonical ``Edge`` pairs whose
``endpoint_a`` is the lexicographically smaller endpoint. Hot loops use the
packed integer keys of ``LatticeCodec`` instead of tuples: each coordinate is
offset by ``COORD_OFFSET`` and stored in ``COORD_BITS`` bits, first axis most
significant, so integer order on keys is lexicographic order on vertices.
An edge key is ``4 * key(endpoint_a) + axis``.
"""
from typing import Iterable, List, NamedTuple, Set, Tuple

import numpy as np

from app.core.errors import DimensionError, DomainError

Vertex = Tuple[int, ...]
Midpoint = Tuple[float, ...]

MAX_DIMENSION = 4
COORD_BITS = 24
COORD_OFFSET = 1 << (COORD_BITS - 1)
_COORD_MASK = (1 << COORD_BITS) - 1


class Edge(NamedTuple):
    endpoint_a: Vertex
    endpoint_b: Vertex


def check_dimension(d: int) -> int:
    if not 1 <= d <= MAX_DIMENSION:
        raise DimensionError(f"dimension must be between 1 and {MAX_DIMENSION}, got {d}")
    return d


def make_edge(u: Iterable[int], v: Iterable[int]) -> Edge:
    """Canonical nearest-neighbour edge between ``u`` and ``v``."""
    u, v = tuple(int(c) for c in u), tuple(int(c) for c in v)
    if len(u) != len(v):
        raise DomainError(f"endpoints {u} and {v} have different dimensions")
    check_dimension(len(u))
    diff = [abs(a - b) for a, b in zip(u, v)]
    if sum(diff) != 1:
        raise DomainError(f"{u} and {v} are not nearest neighbours")
    return Edge(u, v) if u < v else Edge(v, u)


def edge_axis(e: Edge) -> int:
    for axis, (a, b) in enumerate(zip(e.endpoint_a, e.endpoint_b)):
        if a != b:
            return axis
    raise DomainError(f"degenerate edge {e}")


def edge_midpoint(e: Edge) -> Midpoint:
    return tuple((a + b) / 2.0 for a, b in zip(e.endpoint_a, e.endpoint_b))


def neighbors(v: Vertex) -> List[Vertex]:
    """The 2d lattice neighbours, axis ascending, negative direction first."""
    out = []
    for axis in range(len(v)):
        for step in (-1, 1):
            w = list(v)
            w[axis] += step
            out.append(tuple(w))
    return out


def incident_edges(v: Vertex) -> List[Edge]:
    v = tuple(int(c) for c in v)
    check_dimension(len(v))
    return [make_edge(v, w) for w in neighbors(v)]


def boundary_edges(cluster_edges: Iterable[Edge], cluster_vertices: Iterable[Vertex]) -> Set[Edge]:
    """Edges outside the cluster that share an endpoint with a cluster vertex."""
    absorbed = set(cluster_edges)
    out = set()
    for v in cluster_vertices:
        for e in incident_edges(v):
            if e not in absorbed:
                out.add(e)
    return out


def cluster_vertices_of(edges: Iterable[Edge], d: int) -> Set[Vertex]:
    """Vertex set of an edge cluster rooted at the origin."""
    out = {(0,) * d}
    for e in edges:
        out.add(e.endpoint_a)
        out.add(e.endpoint_b)
    return out


class LatticeCodec:
    """Packed integer keys for vertices and edges of Z^d."""

    def __init__(self, d: int):
        self.d = check_dimension(d)
        self.strides = tuple(1 << (COORD_BITS * (d - 1 - axis)) for axis in range(d))
        self.origin_key = self.vertex_key((0,) * d)

    def vertex_key(self, v: Iterable[int]) -> int:
        key = 0
        for c in v:
            c = int(c)
            if not -COORD_OFFSET < c < COORD_OFFSET:
                raise DomainError(f"coordinate {c} outside the supported range ±{COORD_OFFSET}")
            key = (key << COORD_BITS) | (c + COORD_OFFSET)
        return key

    def vertex_of(self, key: int) -> Vertex:
        coords = []
        for _ in range(self.d):
            coords.append((key & _COORD_MASK) - COORD_OFFSET)
            key >>= COORD_BITS
        return tuple(reversed(coords))

    def edge_key(self, e: Edge) -> int:
        return (self.vertex_key(e.endpoint_a) << 2) | edge_axis(e)

    def edge_of(self, key: int) -> Edge:
        axis = key & 3
        lower = self.vertex_of(key >> 2)
        upper = list(lower)
        upper[axis] += 1
        return Edge(lower, tuple(upper))

    def edge_endpoint_keys(self, key: int) -> Tuple[int, int]:
        lower = key >> 2
        return lower, lower + self.strides[key & 3]


def dense_occupancy(vertices: Iterable[Vertex], d: int) -> Tuple[np.ndarray, np.ndarray]:
    """Boolean occupancy array over the bounding box, plus the box's lower corner."""
    pts = np.asarray(list(vertices), dtype=np.int64).reshape(-1, d)
    lower = pts.min(axis=0)
    shape = tuple(pts.max(axis=0) - lower + 1)
    grid = np.zeros(shape, dtype=bool)
    grid[tuple((pts - lower).T)] = True
    return grid, lower
