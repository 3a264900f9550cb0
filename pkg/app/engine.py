"""f-weighted first-passage percolation and the weighted Eden chain on Z^d.

``run_fpp`` grows the cluster with a priority-queue frontier. Every edge gets a
single passage-time draw, keyed by its canonical id, when its first endpoint
is absorbed; its tentative absorption time is that endpoint's time plus the
draw and is never revised. Equal tentative times pop in edge-key order, i.e.
lower endpoint lexicographically, then axis.

``run_eden_chain`` is the discrete chain that absorbs a boundary edge with
probability wt(e) / sum(wt) per step, optionally with Exp(sum(wt)) holding
times that reconstruct the FPP clock.
"""
import heapq
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set

import numpy as np
from scipy import special, stats

import config as settings
from app.core.errors import (
    ConfigError,
    DimensionError,
    PreconditionError,
    VertexCapExceeded,
)
from app.core.rng import derive_seeds, seed_mix, uniform
from app.lattice import (
    Edge,
    LatticeCodec,
    Vertex,
    boundary_edges,
    cluster_vertices_of,
    make_edge,
)
from app.models.run import NextEdgeReport, RunConfig, StopRule, TauInfinityReport
from app.snapshots import Snapshot, encode_snapshot
from app.weights import AlphaWeightFunction, build_norm, build_weight, edge_weight

logger = logging.getLogger(__name__)

_REBUILD_EVERY = 1 << 16


@dataclass
class ClusterState:
    """A growing cluster. Dicts are keyed by packed lattice keys, in absorption order."""
    d: int
    codec: LatticeCodec
    vertex_times: Dict[int, float]
    vertex_coords: Dict[int, Vertex]
    edge_times: Dict[int, float]
    frontier: list = field(default_factory=list)
    frontier_keys: Set[int] = field(default_factory=set)
    clock: float = 0.0
    step_count: int = 0

    def vertices(self) -> List[Vertex]:
        return list(self.vertex_coords.values())

    def edges(self) -> List[Edge]:
        return [self.codec.edge_of(k) for k in self.edge_times]

    def frontier_edges(self) -> Set[Edge]:
        return {self.codec.edge_of(k) for k in self.frontier_keys}

    def passage_time(self, v: Sequence[int]) -> Optional[float]:
        try:
            key = self.codec.vertex_key(v)
        except ValueError:
            return None
        return self.vertex_times.get(key)

    def snapshot(self, step: int, time: float) -> Snapshot:
        return Snapshot(step, time, encode_snapshot(self.d, list(self.edge_times), list(self.edge_times.values())))


@dataclass(frozen=True)
class RunResult:
    config: RunConfig
    final_state: ClusterState
    stop_time: float
    exit_vertex: Optional[Vertex]
    snapshots: List[Snapshot]
    rng_draw_count: int
    exit_times: Dict[float, float]
    sampler: str = "fpp"

    @property
    def step_count(self) -> int:
        return self.final_state.step_count


def _initial_state(config: RunConfig) -> ClusterState:
    """Origin plus ``initial_edges``, everything absorbed at time 0, edges in BFS order."""
    d = config.dimension
    codec = LatticeCodec(d)
    origin = (0,) * d
    state = ClusterState(d, codec, {codec.origin_key: 0.0}, {codec.origin_key: origin}, {})
    pending = []
    for a, b in config.initial_edges:
        try:
            pending.append(make_edge(a, b))
        except ValueError as exc:
            raise ConfigError(f"initial_edges: {exc}")
    while pending:
        progressed = []
        for e in pending:
            ka, kb = codec.vertex_key(e.endpoint_a), codec.vertex_key(e.endpoint_b)
            if ka in state.vertex_times or kb in state.vertex_times:
                state.edge_times[codec.edge_key(e)] = 0.0
                for key, v in ((ka, e.endpoint_a), (kb, e.endpoint_b)):
                    if key not in state.vertex_times:
                        state.vertex_times[key] = 0.0
                        state.vertex_coords[key] = v
                progressed.append(e)
        if not progressed:
            raise ConfigError("initial_edges must form a connected edge set containing the origin")
        pending = [e for e in pending if e not in progressed]
    state.step_count = len(state.edge_times)
    return state


def _passage_quantile(config: RunConfig):
    """Inverse CDF of the unit-rate passage law; None for the exponential fast path."""
    if config.passage_law == "exponential":
        return None
    if config.passage_law == "uniform":
        return lambda u: u
    if config.passage_law == "constant":
        return lambda u: 1.0
    k = config.gamma_shape
    return lambda u: float(special.gammaincinv(k, u))


class _StopCheck:
    """Vertex-level stop conditions plus multi-radius exit instrumentation."""

    def __init__(self, config: RunConfig, codec: LatticeCodec):
        rule = config.stop_rule
        self.kind = rule.kind
        self.r2 = rule.radius * rule.radius if rule.kind == "euclid_radius" else None
        self.norm = build_norm(rule.norm, config.dimension) if rule.kind == "norm_radius" else None
        self.norm_radius = rule.radius
        self.target = codec.vertex_key(rule.vertex) if rule.kind == "vertex_hit" else None
        self.exit_radii = list(config.exit_radii)
        self.exit_sq = [r * r for r in self.exit_radii]
        self.exit_times: Dict[float, float] = {}
        self.next_exit = 0
        self.needs_norm2 = self.r2 is not None or bool(self.exit_radii)

    def hit(self, key: int, coords: Vertex, t: float) -> bool:
        if self.needs_norm2:
            s2 = 0
            for x in coords:
                s2 += x * x
            while self.next_exit < len(self.exit_sq) and s2 > self.exit_sq[self.next_exit]:
                self.exit_times[self.exit_radii[self.next_exit]] = t
                self.next_exit += 1
            if self.r2 is not None and s2 > self.r2:
                return True
        if self.norm is not None and self.norm.scalar(coords) > self.norm_radius:
            return True
        return key == self.target


def run_fpp(config: RunConfig, weight: Optional[AlphaWeightFunction] = None) -> RunResult:
    """Grow the f-weighted FPP cluster until the configured stop rule fires."""
    d = config.dimension
    f = weight if weight is not None else build_weight(config.weight, d)
    state = _initial_state(config)
    codec = state.codec
    strides = codec.strides
    rate = f.scalar
    stream = seed_mix(config.seed)
    quantile = _passage_quantile(config)
    cap = config.vertex_cap or settings.VERTEX_CAP
    rule = config.stop_rule
    max_edges = rule.edges if rule.kind == "edge_count" else None
    max_time = rule.time if rule.kind == "time" else None
    check = _StopCheck(config, codec)
    vertex_rules = check.needs_norm2 or check.norm is not None or check.target is not None
    snap_steps = list(config.snapshot_steps)
    snap_times = list(config.snapshot_times)
    snapshots: List[Snapshot] = []

    heap = state.frontier
    keys = state.frontier_keys
    vtimes = state.vertex_times
    coords_of = state.vertex_coords
    etimes = state.edge_times
    heappush, heappop, log = heapq.heappush, heapq.heappop, math.log
    draws = 0

    def push_incident(vk: int, c: Vertex, t: float) -> None:
        nonlocal draws
        for axis in range(d):
            s = strides[axis]
            for ek, step in ((((vk - s) << 2) | axis, -0.5), ((vk << 2) | axis, 0.5)):
                if ek in etimes or ek in keys:
                    continue
                m = list(c)
                m[axis] += step
                u = uniform(stream, ek)
                x = -log(u) if quantile is None else quantile(u)
                heappush(heap, (t + x / rate(m), ek))
                keys.add(ek)
                draws += 1

    for vk, c in list(coords_of.items()):
        push_incident(vk, c, 0.0)

    stop_time = 0.0
    exit_vertex = None
    while True:
        if max_edges is not None and state.step_count >= max_edges:
            stop_time = state.clock
            break
        t, ek = heap[0]
        while snap_times and t > snap_times[0]:
            snapshots.append(state.snapshot(state.step_count, snap_times.pop(0)))
        if max_time is not None and t > max_time:
            stop_time = max_time
            break
        heappop(heap)
        keys.discard(ek)
        etimes[ek] = t
        state.step_count += 1
        state.clock = t
        lo = ek >> 2
        axis = ek & 3
        hi = lo + strides[axis]
        new = None
        if hi not in vtimes:
            new = hi
            c = list(coords_of[lo])
            c[axis] += 1
        elif lo not in vtimes:
            new = lo
            c = list(coords_of[hi])
            c[axis] -= 1
        if snap_steps and state.step_count == snap_steps[0]:
            snapshots.append(state.snapshot(snap_steps.pop(0), t))
        if new is None:
            continue
        c = tuple(c)
        vtimes[new] = t
        coords_of[new] = c
        if len(vtimes) > cap:
            raise VertexCapExceeded(f"cluster exceeded the vertex cap of {cap}")
        push_incident(new, c, t)
        if vertex_rules and check.hit(new, c, t):
            stop_time = t
            exit_vertex = c
            break

    logger.debug("fpp run seed=%s stopped after %d edges at t=%.6g", config.seed, state.step_count, stop_time)
    return RunResult(config, state, stop_time, exit_vertex, snapshots, draws, check.exit_times, "fpp")


def run_eden_chain(config: RunConfig, weight: Optional[AlphaWeightFunction] = None) -> RunResult:
    """Weighted Eden chain: absorb boundary edge e with probability wt(e)/sum(wt).

    Boundary weights live in a Fenwick tree over append-only slots. An absorbed
    edge zeroes its slot; a draw that lands on an empty slot through rounding
    is redrawn. ``stop_time`` is the reconstructed clock with holding times,
    else the step count.
    """
    rule = config.stop_rule
    if rule.kind == "time":
        raise PreconditionError("the Eden chain has no intrinsic clock; stop on edge_count or a radius")
    if config.passage_law != "exponential":
        raise PreconditionError("the Eden chain realizes exponential passage times only")
    d = config.dimension
    f = weight if weight is not None else build_weight(config.weight, d)
    state = _initial_state(config)
    codec = state.codec
    strides = codec.strides
    rate = f.scalar
    stream = seed_mix(config.seed)
    cap = config.vertex_cap or settings.VERTEX_CAP
    max_edges = rule.edges if rule.kind == "edge_count" else None
    check = _StopCheck(config, codec)
    vertex_rules = check.needs_norm2 or check.norm is not None or check.target is not None
    holding = config.holding_times
    snap_steps = list(config.snapshot_steps)
    snapshots: List[Snapshot] = []

    vtimes = state.vertex_times
    coords_of = state.vertex_coords
    etimes = state.edge_times
    size = 1024
    tree = [0.0] * (size + 1)
    wts: List[float] = []
    slot_edge: List[int] = []
    slot_of: Dict[int, int] = {}
    total = 0.0
    log = math.log

    def rebuild() -> float:
        nonlocal tree
        tree = [0.0] * (size + 1)
        tree[1:len(wts) + 1] = wts
        for i in range(1, size + 1):
            j = i + (i & -i)
            if j <= size:
                tree[j] += tree[i]
        return math.fsum(wts)

    def add(slot: int, delta: float) -> None:
        i = slot + 1
        while i <= size:
            tree[i] += delta
            i += i & -i

    def find(target: float) -> int:
        pos = 0
        bit = 1 << (size.bit_length() - 1)
        while bit:
            nxt = pos + bit
            if nxt <= size and tree[nxt] <= target:
                target -= tree[nxt]
                pos = nxt
            bit >>= 1
        return pos

    def push_incident(vk: int, c: Vertex) -> None:
        nonlocal total, size
        for axis in range(d):
            s = strides[axis]
            for ek, step in ((((vk - s) << 2) | axis, -0.5), ((vk << 2) | axis, 0.5)):
                if ek in etimes or ek in slot_of:
                    continue
                m = list(c)
                m[axis] += step
                w = rate(m)
                slot = len(wts)
                wts.append(w)
                slot_edge.append(ek)
                slot_of[ek] = slot
                if slot >= size:
                    size *= 2
                    total = rebuild()
                else:
                    add(slot, w)
                    total += w

    for vk, c in list(coords_of.items()):
        push_incident(vk, c)

    counter = 0
    stop_time = 0.0
    exit_vertex = None
    while True:
        if max_edges is not None and state.step_count >= max_edges:
            break
        if total <= 0.0 or (state.step_count and state.step_count % _REBUILD_EVERY == 0):
            total = rebuild()
        if holding:
            state.clock += -log(uniform(stream, counter)) / total
            counter += 1
        while True:
            slot = find(uniform(stream, counter) * total)
            counter += 1
            if slot < len(wts) and wts[slot] > 0.0:
                break
            if counter % 64 == 0:
                total = rebuild()
        ek = slot_edge[slot]
        w = wts[slot]
        wts[slot] = 0.0
        add(slot, -w)
        total -= w
        del slot_of[ek]
        t = state.clock if holding else float(state.step_count + 1)
        etimes[ek] = t
        state.step_count += 1
        lo = ek >> 2
        axis = ek & 3
        hi = lo + strides[axis]
        new = None
        if hi not in vtimes:
            new = hi
            c = list(coords_of[lo])
            c[axis] += 1
        elif lo not in vtimes:
            new = lo
            c = list(coords_of[hi])
            c[axis] -= 1
        if snap_steps and state.step_count == snap_steps[0]:
            snapshots.append(state.snapshot(snap_steps.pop(0), t))
        if new is None:
            continue
        c = tuple(c)
        vtimes[new] = t
        coords_of[new] = c
        if len(vtimes) > cap:
            raise VertexCapExceeded(f"cluster exceeded the vertex cap of {cap}")
        push_incident(new, c)
        if vertex_rules and check.hit(new, c, t):
            exit_vertex = c
            break

    state.frontier_keys = set(slot_of)
    stop_time = state.clock if holding else float(state.step_count)
    return RunResult(config, state, stop_time, exit_vertex, snapshots, counter, check.exit_times, "eden")


def passage_time(result: RunResult, v: Sequence[int]) -> Optional[float]:
    """T(0, v) if v was absorbed before the stop, else None."""
    return result.final_state.passage_time(v)


def _ray_passage_sums(f: AlphaWeightFunction, d: int, steps: int) -> np.ndarray:
    """Cumulative expected passage times along each of the 2d coordinate rays."""
    k = np.arange(steps) + 0.5
    sums = []
    for axis in range(d):
        for sign in (1.0, -1.0):
            pts = np.zeros((steps, d))
            pts[:, axis] = sign * k
            sums.append(np.cumsum(1.0 / f.evaluate(pts)))
    return np.array(sums)


def tau_infinity_estimate(config: RunConfig, radius_schedule: Sequence[float],
                          weight: Optional[AlphaWeightFunction] = None) -> TauInfinityReport:
    """sigma_r over a radius schedule from one run, with the coordinate-ray bounds.

    The ray bound for radius r is the smallest expected time to walk a
    coordinate ray out to the first vertex beyond r. The tail bound sums the
    whole ray, closing the sum past K terms with (K - 1/2)^(1-alpha)/((alpha-1) f0(e)).
    """
    d = config.dimension
    f = weight if weight is not None else build_weight(config.weight, d)
    if f.alpha <= 1:
        raise PreconditionError(f"tau_infinity is finite only for alpha > 1, got alpha={f.alpha}")
    radii = [float(r) for r in radius_schedule]
    if not radii or any(b <= a for a, b in zip(radii, radii[1:])):
        raise PreconditionError("radius_schedule must be non-empty and strictly increasing")
    run_config = config.model_copy(update={
        "stop_rule": StopRule(kind="euclid_radius", radius=radii[-1]),
        "exit_radii": radii,
    })
    result = run_fpp(run_config, f)
    sigma = [result.exit_times.get(r, result.stop_time) for r in radii]

    K = 1000
    sums = _ray_passage_sums(f, d, max(K, int(radii[-1]) + 2))
    ray_bounds = [float(sums[:, int(math.floor(r))].min()) for r in radii]
    tails = []
    for row, axis_sign in zip(sums, [(a, s) for a in range(d) for s in (1.0, -1.0)]):
        e = np.zeros(d)
        e[axis_sign[0]] = axis_sign[1]
        f0 = f.profile.scalar(tuple(e))
        tails.append(row[K - 1] + (K - 0.5) ** (1.0 - f.alpha) / ((f.alpha - 1.0) * f0))
    return TauInfinityReport(radii=radii, sigma=sigma, ray_bounds=ray_bounds,
                             tail_bound=float(min(tails)), seed=config.seed)


def attachment_probabilities(cluster_edges: Sequence[Edge], f: AlphaWeightFunction,
                             d: int) -> Dict[Edge, float]:
    """Exact next-step law wt(e)/sum(wt) over the boundary of a cluster."""
    cluster_edges = [make_edge(*e) for e in cluster_edges]
    vertices = cluster_vertices_of(cluster_edges, d)
    codec = LatticeCodec(d)
    boundary = sorted(boundary_edges(cluster_edges, vertices), key=codec.edge_key)
    weights = [edge_weight(f, e) for e in boundary]
    total = math.fsum(weights)
    return {e: w / total for e, w in zip(boundary, weights)}


def _edge_label(e: Edge) -> str:
    return f"{e.endpoint_a}-{e.endpoint_b}"


def next_edge_distribution(cluster_edges: Sequence[Edge], f: AlphaWeightFunction, d: int,
                           replicates: int, seed: int = 0) -> NextEdgeReport:
    """Empirical law of the next FPP absorption from a fixed cluster, against wt/sum(wt)."""
    cluster_edges = [make_edge(*e) for e in cluster_edges]
    expected = attachment_probabilities(cluster_edges, f, d)
    base = RunConfig(
        dimension=d,
        initial_edges=[[list(e.endpoint_a), list(e.endpoint_b)] for e in cluster_edges],
        stop_rule=StopRule(kind="edge_count", edges=len(cluster_edges) + 1),
    )
    codec = LatticeCodec(d)
    counts: Counter = Counter()
    for s in derive_seeds(seed, replicates):
        result = run_fpp(base.model_copy(update={"seed": s}), f)
        counts[next(reversed(result.final_state.edge_times))] += 1
    labels = [_edge_label(e) for e in expected]
    observed = np.array([counts.get(codec.edge_key(e), 0) for e in expected], dtype=float)
    probs = np.array(list(expected.values()))
    chi2, p = stats.chisquare(observed, probs * replicates)
    return NextEdgeReport(replicates=replicates, seed=seed,
                          counts={lbl: int(n) for lbl, n in zip(labels, observed)},
                          expected={lbl: float(pr) for lbl, pr in zip(labels, probs)},
                          chi_square=float(chi2), p_value=float(p))


def eden_chain_d1_batch(f: AlphaWeightFunction, steps: int, replicates: int, seed: int = 0) -> np.ndarray:
    """Right-edge counts after ``steps`` chain steps for many independent d=1 chains.

    In d=1 the boundary is always the two end edges, with midpoints
    k_R + 1/2 and -(k_L + 1/2), so all replicates advance together.
    """
    if f.d != 1:
        raise DimensionError(f"the batched chain is one-dimensional, got d={f.d}")
    rng = np.random.default_rng(seed)
    right = np.zeros(replicates, dtype=np.int64)
    left = np.zeros(replicates, dtype=np.int64)
    for _ in range(steps):
        w_right = f.evaluate((right + 0.5)[:, None])
        w_left = f.evaluate((-(left + 0.5))[:, None])
        go_right = rng.random(replicates) * (w_right + w_left) < w_right
        right += go_right
        left += ~go_right
    return right
