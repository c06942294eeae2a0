"""Local node vulnerability measures (connectivity, accessibility, criticality).

All measures treat the network as a directed graph. Degrees count links
(in + out). Distances are shortest-path lengths under a positive link weight,
free-flow time by default. A value of ``None`` marks a measure that is
undefined at that node.
"""

from __future__ import annotations

import csv
import heapq
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from .network import DemandTable, Network


class Category(str, Enum):
    CONNECTIVITY = "Connectivity"
    ACCESSIBILITY = "Accessibility"
    CRITICALITY = "Criticality"


class MeasureKind(str, Enum):
    DEGREE_CENTRALITY = "DegreeCentrality"
    INDEGREE_CENTRALITY = "IndegreeCentrality"
    OUTDEGREE_CENTRALITY = "OutdegreeCentrality"
    BETWEENNESS_CENTRALITY = "BetweennessCentrality"
    CLOSENESS_CENTRALITY = "ClosenessCentrality"
    HARMONIC_CENTRALITY = "HarmonicCentrality"
    EIGENVECTOR_CENTRALITY = "EigenvectorCentrality"
    KATZ_CENTRALITY = "KatzCentrality"
    PAGE_RANK = "PageRank"
    NEIGHBORHOOD_CONNECTIVITY = "NeighborhoodConnectivity"
    GROUP_CENTRALITY = "GroupCentrality"
    AGGREGATE_MEASURE = "AggregateMeasure"
    AVERAGE_RATING = "AverageRating"
    AVERAGE_PATH_DISTANCE = "AveragePathDistance"
    AVERAGE_PATH_DISTANCE_AFTER_DISRUPTION = "AveragePathDistanceAfterDisruption"
    PHI_NODE_CENTRALITY = "PhiNodeCentrality"
    PROPORTIONAL_FLOW = "ProportionalFlow"
    WEIGHTED_NODE = "WeightedNode"
    WEIGHTED_NODE_AFTER_DISRUPTION = "WeightedNodeAfterDisruption"
    UNDELIVERED_DEMAND_AFTER_DISRUPTION = "UndeliveredDemandAfterDisruption"
    PATH_DISTANCE_CHANGE = "PathDistanceChange"
    SEGMENTWISE = "Segmentwise"
    EXPOSURE = "Exposure"
    TSALLIS_REDUNDANCY = "TsallisRedundancy"
    STAR_TSALLIS_REDUNDANCY = "StarTsallisRedundancy"
    COMPLEXITY_MEASURE_TSALLIS = "ComplexityMeasureTsallis"
    COMPLEXITY_MEASURE_DISTRIBUTION = "ComplexityMeasureDistribution"

    @property
    def category(self) -> Category:
        return _CATEGORY[self]

    @property
    def family(self) -> str:
        if self in FLOW_KINDS:
            return "flow"
        if self in DISRUPTION_KINDS:
            return "disruption"
        return "topological"


K = MeasureKind
_CATEGORY = {
    **{k: Category.CONNECTIVITY for k in (
        K.NEIGHBORHOOD_CONNECTIVITY, K.PHI_NODE_CENTRALITY, K.EIGENVECTOR_CENTRALITY, K.PROPORTIONAL_FLOW,
        K.DEGREE_CENTRALITY, K.INDEGREE_CENTRALITY, K.OUTDEGREE_CENTRALITY, K.WEIGHTED_NODE_AFTER_DISRUPTION,
        K.WEIGHTED_NODE)},
    **{k: Category.ACCESSIBILITY for k in (
        K.PAGE_RANK, K.HARMONIC_CENTRALITY, K.KATZ_CENTRALITY, K.CLOSENESS_CENTRALITY, K.EXPOSURE,
        K.BETWEENNESS_CENTRALITY, K.AGGREGATE_MEASURE, K.AVERAGE_RATING)},
    **{k: Category.CRITICALITY for k in (
        K.UNDELIVERED_DEMAND_AFTER_DISRUPTION, K.GROUP_CENTRALITY, K.PATH_DISTANCE_CHANGE,
        K.AVERAGE_PATH_DISTANCE, K.AVERAGE_PATH_DISTANCE_AFTER_DISRUPTION, K.SEGMENTWISE,
        K.TSALLIS_REDUNDANCY, K.STAR_TSALLIS_REDUNDANCY, K.COMPLEXITY_MEASURE_DISTRIBUTION,
        K.COMPLEXITY_MEASURE_TSALLIS)},
}

FLOW_KINDS = frozenset(
    {K.PHI_NODE_CENTRALITY, K.PROPORTIONAL_FLOW, K.WEIGHTED_NODE, K.TSALLIS_REDUNDANCY, K.STAR_TSALLIS_REDUNDANCY}
)
DISRUPTION_KINDS = frozenset(
    {
        K.AVERAGE_PATH_DISTANCE_AFTER_DISRUPTION,
        K.WEIGHTED_NODE_AFTER_DISRUPTION,
        K.UNDELIVERED_DEMAND_AFTER_DISRUPTION,
        K.PATH_DISTANCE_CHANGE,
        K.SEGMENTWISE,
    }
)
TOPOLOGICAL_KINDS = frozenset(k for k in MeasureKind if k not in FLOW_KINDS and k not in DISRUPTION_KINDS)

TSALLIS_INDEX = 1.43
KATZ_ALPHA = 0.5
KATZ_HORIZON = 10
PAGERANK_DAMPING = 0.85


@dataclass
class MeasureVector:
    kind: MeasureKind
    values: dict[int, float | None]

    def defined(self) -> dict[int, float]:
        return {n: v for n, v in self.values.items() if v is not None}

    def __getitem__(self, node):
        return self.values[node]


def rank_nodes(vector: MeasureVector, top_m: int | None = None) -> list[tuple[int, float | None]]:
    """Descending by value, ties by ascending node id, undefined values last."""
    items = sorted(vector.values.items(), key=lambda kv: (kv[1] is None, -(kv[1] or 0.0), kv[0]))
    if top_m is None:
        return items
    if top_m < 1 or top_m > len(items):
        raise ValueError(f"top_m must be in [1, {len(items)}]")
    return items[:top_m]


# -- graph helpers ---------------------------------------------------------


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= 1e-9 * max(1.0, abs(a), abs(b))


def _adjacency(network: Network, weights: Mapping[int, float] | None):
    if weights is None:
        weights = {l.id: l.free_flow_time for l in network.links}
    adj: dict[int, list[tuple[int, float]]] = {i: [] for i in network.nodes}
    for l in network.links:
        w = weights[l.id]
        if not w > 0:
            raise ValueError(f"distance measures need positive weights (link {l.id} has {w})")
        adj[l.tail].append((l.head, w))
    return adj


def _sssp(adj, source: int, removed: frozenset = frozenset()):
    """Dijkstra from ``source`` with shortest-path counts; ``removed`` nodes are skipped."""
    dist = {source: 0.0}
    sigma = {source: 1}
    done = set()
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v, w in adj[u]:
            if v in removed:
                continue
            nd = d + w
            if v not in dist or (nd < dist[v] and not _close(nd, dist[v])):
                dist[v] = nd
                sigma[v] = sigma[u]
                heapq.heappush(heap, (nd, v))
            elif _close(nd, dist[v]) and v not in done:
                sigma[v] += sigma[u]
    return dist, sigma


def _all_pairs(adj, removed: frozenset = frozenset()):
    dist, sigma = {}, {}
    for s in adj:
        if s in removed:
            continue
        dist[s], sigma[s] = _sssp(adj, s, removed)
    return dist, sigma


def _degrees(network: Network):
    indeg = {i: len(network.in_links(i)) for i in network.nodes}
    outdeg = {i: len(network.out_links(i)) for i in network.nodes}
    return indeg, outdeg


def _neighbors(network: Network, i: int) -> set[int]:
    out = {network.link(l).head for l in network.out_links(i)}
    inn = {network.link(l).tail for l in network.in_links(i)}
    return (out | inn) - {i}


def _adjacency_matrix(network: Network) -> tuple[list[int], np.ndarray]:
    nodes = list(network.nodes)
    pos = {n: k for k, n in enumerate(nodes)}
    A = np.zeros((len(nodes), len(nodes)))
    for l in network.links:
        A[pos[l.tail], pos[l.head]] = 1.0
    return nodes, A


# -- topological measures --------------------------------------------------


def degree_centrality(network: Network, mode: str = "total") -> dict[int, float]:
    indeg, outdeg = _degrees(network)
    total = sum(indeg.values()) + sum(outdeg.values())
    pick = {"total": lambda i: indeg[i] + outdeg[i], "in": indeg.__getitem__, "out": outdeg.__getitem__}[mode]
    if total == 0:
        return {i: 0.0 for i in network.nodes}
    return {i: pick(i) / total for i in network.nodes}


def betweenness(
    network: Network,
    weights=None,
    od_pairs: Iterable[tuple[int, int]] | None = None,
    standard: bool = False,
    normalized: bool = True,
) -> dict[int, float]:
    """Shortest-path betweenness.

    Default: share of all shortest OD paths that pass through ``i`` as an
    interior node, over ``od_pairs`` (all ordered pairs when ``None``).
    ``standard=True`` gives the usual pair-averaged form
    ``sum_st sigma_st(i) / sigma_st``, divided by ``(n-1)(n-2)`` if normalized.
    """
    adj = _adjacency(network, weights)
    dist, sigma = _all_pairs(adj)
    nodes = list(network.nodes)
    if od_pairs is None:
        od_pairs = [(o, d) for o in nodes for d in nodes if o != d]
    od_pairs = [(o, d) for o, d in od_pairs if o != d and d in dist[o]]
    through = {i: 0.0 for i in nodes}
    total = 0.0
    for o, d in od_pairs:
        s_od = sigma[o][d]
        total += s_od
        for i in nodes:
            if i in (o, d) or i not in dist[o] or d not in dist[i]:
                continue
            if _close(dist[o][i] + dist[i][d], dist[o][d]):
                k = sigma[o][i] * sigma[i][d]
                through[i] += k / s_od if standard else k
    if standard:
        n = len(nodes)
        scale = 1.0 / ((n - 1) * (n - 2)) if normalized and n > 2 else 1.0
        return {i: v * scale for i, v in through.items()}
    if total == 0:
        return {i: 0.0 for i in nodes}
    return {i: v / total for i, v in through.items()}


def closeness(network: Network, weights=None) -> dict[int, float | None]:
    adj = _adjacency(network, weights)
    n = len(network)
    out = {}
    for i in network.nodes:
        dist, _ = _sssp(adj, i)
        if len(dist) < n or n < 2:
            out[i] = None
        else:
            out[i] = 1.0 / sum(d for j, d in dist.items() if j != i)
    return out


def harmonic(network: Network, weights=None) -> dict[int, float]:
    adj = _adjacency(network, weights)
    out = {}
    for i in network.nodes:
        dist, _ = _sssp(adj, i)
        out[i] = sum(1.0 / d for j, d in dist.items() if j != i)
    return out


def eigenvector(network: Network, tol: float = 1e-10, max_iter: int = 10000) -> dict[int, float | None]:
    """Perron vector of ``A`` (``x = A x / lambda``, out-neighbour sums), unit-sum normalized."""
    nodes, A = _adjacency_matrix(network)
    if len(nodes) == 0:
        return {}
    rho = max(abs(np.linalg.eigvals(A))) if len(nodes) else 0.0
    if rho < 1e-12:
        return {i: None for i in nodes}
    # Shifting by I keeps the iteration from cycling on periodic graphs.
    M = A + np.eye(len(nodes))
    x = np.full(len(nodes), 1.0 / len(nodes))
    for _ in range(max_iter):
        nx = M @ x
        nx /= nx.sum()
        if np.abs(nx - x).sum() < tol:
            x = nx
            break
        x = nx
    else:
        warnings.warn("eigenvector iteration did not converge", RuntimeWarning, stacklevel=2)
    return {n: float(v) for n, v in zip(nodes, x)}


def katz(network: Network, alpha: float = KATZ_ALPHA, horizon: int = KATZ_HORIZON) -> dict[int, float]:
    """Truncated walk count ``sum_{k=1..horizon} alpha^k (A^k 1)_i``."""
    nodes, A = _adjacency_matrix(network)
    if len(nodes) and alpha * max(abs(np.linalg.eigvals(A))) >= 1.0:
        warnings.warn(
            f"Katz series with alpha={alpha} diverges on this graph; using a {horizon}-step truncation",
            RuntimeWarning,
            stacklevel=2,
        )
    term = np.ones(len(nodes))
    total = np.zeros(len(nodes))
    for _ in range(horizon):
        term = alpha * (A @ term)
        total += term
    return {n: float(v) for n, v in zip(nodes, total)}


def pagerank(network: Network, damping: float = PAGERANK_DAMPING, tol: float = 1e-14, max_iter: int = 100000):
    """Damped PageRank; rank of dangling nodes is spread uniformly."""
    nodes, A = _adjacency_matrix(network)
    n = len(nodes)
    outdeg = A.sum(axis=1)
    dangling = outdeg == 0
    P = np.divide(A, outdeg[:, None], out=np.zeros_like(A), where=~dangling[:, None])
    x = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        nx = damping * (x @ P + x[dangling].sum() / n) + (1 - damping) / n
        if np.abs(nx - x).sum() < tol:
            x = nx
            break
        x = nx
    return {nd: float(v) for nd, v in zip(nodes, x)}


def neighborhood_connectivity(network: Network) -> dict[int, float | None]:
    """Mean total degree of the distinct neighbours of ``i`` (either direction)."""
    indeg, outdeg = _degrees(network)
    out = {}
    for i in network.nodes:
        nb = _neighbors(network, i)
        out[i] = sum(indeg[j] + outdeg[j] for j in nb) / len(nb) if nb else None
    return out


def group_centrality(network: Network, bc: Mapping[int, float]) -> dict[int, float]:
    return {i: sum(bc[j] for j in _neighbors(network, i)) for i in network.nodes}


def aggregate(parts: Sequence[Mapping[int, float]], weights: Sequence[float]) -> dict[int, float]:
    """Weighted sum of relative deviations from the mean; a zero-mean part contributes 0."""
    nodes = list(parts[0])
    out = {i: 0.0 for i in nodes}
    for vec, w in zip(parts, weights):
        mean = sum(vec[i] for i in nodes) / len(nodes)
        if mean == 0:
            continue
        for i in nodes:
            out[i] += w * (vec[i] - mean) / mean
    return out


def average_rating(network: Network) -> dict[int, float | None]:
    indeg, outdeg = _degrees(network)
    m = min(indeg[i] + outdeg[i] for i in network.nodes)
    val = None if m == 0 else (1.0 / len(network)) * (1.0 / m)
    return {i: val for i in network.nodes}


def average_path_distance(network: Network, weights=None) -> dict[int, float | None]:
    """Mean distance over reachable ordered pairs that start or end at ``i``."""
    adj = _adjacency(network, weights)
    dist, _ = _all_pairs(adj)
    out = {}
    for i in network.nodes:
        ds = [dist[i][j] for j in dist[i] if j != i] + [dist[j][i] for j in network.nodes if j != i and i in dist[j]]
        out[i] = sum(ds) / len(ds) if ds else None
    return out


def exposure(network: Network, weights=None) -> dict[int, float]:
    """Total distance increase among other pairs when ``i`` is removed, over ``n(n-1)``.

    Pairs disconnected before or after the removal are skipped.
    """
    adj = _adjacency(network, weights)
    base, _ = _all_pairs(adj)
    nodes = list(network.nodes)
    n = len(nodes)
    out = {}
    for i in nodes:
        after, _ = _all_pairs(adj, frozenset({i}))
        inc = 0.0
        for k in nodes:
            if k == i:
                continue
            for l in nodes:
                if l in (i, k) or l not in base[k] or l not in after[k]:
                    continue
                inc += after[k][l] - base[k][l]
        out[i] = inc / (n * (n - 1)) if n > 1 else 0.0
    return out


def _degree_shares(network: Network) -> dict[int, float]:
    return degree_centrality(network, "total")


def complexity_tsallis(network: Network, bc: Mapping[int, float]) -> dict[int, float]:
    """``(p^q - p) / (1 - q)`` with degree share ``p`` and ``q = 1 + max BC - BC_i``."""
    p = _degree_shares(network)
    top = max(bc.values()) if bc else 0.0
    out = {}
    for i in network.nodes:
        q = 1.0 + top - bc[i]
        pi = p[i]
        if pi == 0:
            out[i] = 0.0
        elif abs(1.0 - q) < 1e-12:
            out[i] = -pi * math.log(pi)
        else:
            out[i] = (pi**q - pi) / (1.0 - q)
    return out


def complexity_distribution(network: Network) -> dict[int, float]:
    """``p ln p`` of the degree share (0 where the share is 0)."""
    return {i: (p * math.log(p) if p > 0 else 0.0) for i, p in _degree_shares(network).items()}


# -- flow context ---------------------------------------------------------


@dataclass
class FlowContext:
    node_flow: dict[int, float]
    delivered: dict[int, float]
    link_flow: dict[int, float] = field(default_factory=dict)

    @property
    def total_delivered(self) -> float:
        return sum(self.delivered.values())


def _route_for(network, adj_w, o, d, routes, removed):
    """Link sequence carrying (o, d): first surviving candidate route, else a shortest path."""
    if routes is not None and (o, d) in routes:
        for path in routes[(o, d)]:
            if not removed.intersection(path.nodes):
                return list(path.links)
        return None
    if o in removed or d in removed:
        return None
    # Shortest path with deterministic ties (smallest predecessor link id).
    dist = {o: 0.0}
    pred: dict[int, int] = {}
    heap = [(0.0, o)]
    done = set()
    while heap:
        du, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for lid in network.out_links(u):
            v = network.link(lid).head
            if v in removed:
                continue
            nd = du + adj_w[lid]
            if v not in dist or nd < dist[v] - 1e-12:
                dist[v] = nd
                pred[v] = lid
                heapq.heappush(heap, (nd, v))
    if d not in dist:
        return None
    links, v = [], d
    while v != o:
        lid = pred[v]
        links.append(lid)
        v = network.link(lid).tail
    return links[::-1]


def all_or_nothing(
    network: Network, demand: DemandTable, routes=None, weights=None, removed: Iterable[int] = ()
) -> FlowContext:
    """Each OD demand loaded on one path; pairs touching a removed node are lost."""
    removed = frozenset(removed)
    if weights is None:
        weights = {l.id: l.free_flow_time for l in network.links}
    node_flow = {i: 0.0 for i in network.nodes if i not in removed}
    delivered = {d: 0.0 for d in demand.destinations}
    link_flow = {l.id: 0.0 for l in network.links}
    for o, d in demand.pairs:
        q = demand.demand(o, d)
        if q <= 0 or o in removed or d in removed:
            continue
        links = _route_for(network, weights, o, d, routes, removed)
        if links is None:
            continue
        node_flow[o] += q
        for lid in links:
            link_flow[lid] += q
            node_flow[network.link(lid).head] += q
        delivered[d] += q
    return FlowContext(node_flow, delivered, link_flow)


def phi(flow: FlowContext) -> dict[int, float]:
    total = flow.total_delivered
    if not total > 0:
        raise ValueError("flow context empty")
    return {i: f / total for i, f in flow.node_flow.items()}


def proportional_flow(flow: FlowContext, bc: Mapping[int, float]) -> dict[int, float]:
    total = sum(flow.node_flow.values())
    if not total > 0:
        raise ValueError("flow context empty")
    return {i: (f / total + bc[i]) / 2 for i, f in flow.node_flow.items()}


def weighted_node(flow: FlowContext, bc: Mapping[int, float]) -> dict[int, float]:
    return {i: (p + bc[i]) / 2 for i, p in phi(flow).items()}


def star_tsallis(network: Network, flow: FlowContext, em: float = TSALLIS_INDEX) -> dict[int, float]:
    """``1/(em-1) * sum_j (p - p^2)`` with ``p = f_ij / f_i`` over the out-links of ``i``."""
    if not flow.total_delivered > 0:
        raise ValueError("flow context empty")
    out = {}
    for i, fi in flow.node_flow.items():
        s = 0.0
        if fi > 0:
            for lid in network.out_links(i):
                p = flow.link_flow.get(lid, 0.0) / fi
                s += p - p * p
        out[i] = s / (em - 1.0)
    return out


def tsallis(network: Network, flow: FlowContext, em: float = TSALLIS_INDEX) -> dict[int, float]:
    """``1/(em-1) * (sum_j p_ij - sum_j p_ij^em)`` with ``p_ij = f_ij / sum_k f_k``."""
    total = sum(flow.node_flow.values())
    if not total > 0:
        raise ValueError("flow context empty")
    out = {}
    for i in flow.node_flow:
        ps = [flow.link_flow.get(lid, 0.0) / total for lid in network.out_links(i)]
        out[i] = (sum(ps) - sum(p**em for p in ps)) / (em - 1.0)
    return out


# -- disruption measures ---------------------------------------------------


def _od_pairs(network: Network, demand: DemandTable | None):
    if demand is None:
        return [(o, d) for o in network.nodes for d in network.nodes if o != d]
    return [(o, d) for o, d in demand.pairs if o != d]


@dataclass
class DisruptionResult:
    apd: dict[int, float | None]
    path_change: dict[int, float | None]
    undelivered: dict[int, float]
    weighted_after: dict[int, float | None]


def disruption_profile(
    network: Network, demand: DemandTable, routes=None, weights=None, od_bc: bool = False
) -> DisruptionResult:
    """Remove each node ``j`` in turn and recompute distances, flows, phi and BC.

    ``apd[j]``: mean OD distance after removal over OD pairs not touching ``j``
    that stay connected. ``path_change[j]``: the same mean minus the mean of
    the pre-removal distances of those pairs. ``undelivered[j]``: delivered
    flow after minus before. ``weighted_after[j]``: mean over surviving
    nodes of ``(phi + BC) / 2`` on the reduced graph.
    """
    adj = _adjacency(network, weights)
    base, _ = _all_pairs(adj)
    pairs = _od_pairs(network, demand)
    before = all_or_nothing(network, demand, routes, weights)
    apd, change, undelivered, gw = {}, {}, {}, {}
    for j in network.nodes:
        after, _ = _all_pairs(adj, frozenset({j}))
        kept = [(o, d) for o, d in pairs if j not in (o, d) and d in after[o]]
        if kept:
            apd[j] = sum(after[o][d] for o, d in kept) / len(kept)
            change[j] = apd[j] - sum(base[o][d] for o, d in kept) / len(kept)
        else:
            apd[j] = change[j] = None
        flow = all_or_nothing(network, demand, routes, weights, removed=[j])
        undelivered[j] = flow.total_delivered - before.total_delivered
        sub = network.without_nodes([j])
        if len(sub) == 0:
            gw[j] = None
            continue
        sub_w = None if weights is None else {l.id: weights[l.id] for l in sub.links}
        bc = betweenness(sub, sub_w, _od_pairs(sub, None) if not od_bc else [p for p in pairs if j not in p])
        total = flow.total_delivered
        vals = [((flow.node_flow[i] / total if total > 0 else 0.0) + bc[i]) / 2 for i in sub.nodes]
        gw[j] = sum(vals) / len(vals)
    return DisruptionResult(apd, change, undelivered, gw)


# -- dispatch ---------------------------------------------------------------


@dataclass
class MeasureContext:
    """Inputs shared by the measure computations.

    ``od_pairs=None`` means betweenness is taken over all ordered node pairs.
    """

    network: Network
    demand: DemandTable | None = None
    routes: object = None
    weights: Mapping[int, float] | None = None
    od_pairs: list[tuple[int, int]] | None = None
    aggregate_weights: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    _cache: dict = field(default_factory=dict, repr=False)

    def bc(self):
        if "bc" not in self._cache:
            self._cache["bc"] = betweenness(self.network, self.weights, self.od_pairs)
        return self._cache["bc"]

    def flow(self) -> FlowContext:
        if self.demand is None:
            raise ValueError("flow measures need a demand table")
        if "flow" not in self._cache:
            self._cache["flow"] = all_or_nothing(self.network, self.demand, self.routes, self.weights)
        return self._cache["flow"]

    def disruption(self) -> DisruptionResult:
        if self.demand is None:
            raise ValueError("disruption measures need a demand table")
        if "disruption" not in self._cache:
            self._cache["disruption"] = disruption_profile(self.network, self.demand, self.routes, self.weights)
        return self._cache["disruption"]


def topological_measures(network: Network, kind: MeasureKind, ctx: MeasureContext | None = None) -> MeasureVector:
    ctx = ctx or MeasureContext(network)
    if kind not in TOPOLOGICAL_KINDS:
        raise ValueError(f"{kind.value} is not a topological measure")
    w = ctx.weights
    if kind == K.DEGREE_CENTRALITY:
        vals = degree_centrality(network, "total")
    elif kind == K.INDEGREE_CENTRALITY:
        vals = degree_centrality(network, "in")
    elif kind == K.OUTDEGREE_CENTRALITY:
        vals = degree_centrality(network, "out")
    elif kind == K.BETWEENNESS_CENTRALITY:
        vals = ctx.bc()
    elif kind == K.CLOSENESS_CENTRALITY:
        vals = closeness(network, w)
    elif kind == K.HARMONIC_CENTRALITY:
        vals = harmonic(network, w)
    elif kind == K.EIGENVECTOR_CENTRALITY:
        vals = eigenvector(network)
    elif kind == K.KATZ_CENTRALITY:
        vals = katz(network)
    elif kind == K.PAGE_RANK:
        vals = pagerank(network)
    elif kind == K.NEIGHBORHOOD_CONNECTIVITY:
        vals = neighborhood_connectivity(network)
    elif kind == K.GROUP_CENTRALITY:
        vals = group_centrality(network, ctx.bc())
    elif kind == K.AGGREGATE_MEASURE:
        parts = [degree_centrality(network), harmonic(network, w), ctx.bc()]
        vals = aggregate(parts, ctx.aggregate_weights)
    elif kind == K.AVERAGE_RATING:
        vals = average_rating(network)
    elif kind == K.AVERAGE_PATH_DISTANCE:
        vals = average_path_distance(network, w)
    elif kind == K.EXPOSURE:
        vals = exposure(network, w)
    elif kind == K.COMPLEXITY_MEASURE_TSALLIS:
        vals = complexity_tsallis(network, ctx.bc())
    else:
        vals = complexity_distribution(network)
    return MeasureVector(kind, dict(vals))


def flow_measures(network: Network, flow: FlowContext, kind: MeasureKind, bc=None) -> MeasureVector:
    if kind not in FLOW_KINDS:
        raise ValueError(f"{kind.value} is not a flow measure")
    if bc is None and kind in (K.PROPORTIONAL_FLOW, K.WEIGHTED_NODE):
        bc = betweenness(network)
    if kind == K.PHI_NODE_CENTRALITY:
        vals = phi(flow)
    elif kind == K.PROPORTIONAL_FLOW:
        vals = proportional_flow(flow, bc)
    elif kind == K.WEIGHTED_NODE:
        vals = weighted_node(flow, bc)
    elif kind == K.STAR_TSALLIS_REDUNDANCY:
        vals = star_tsallis(network, flow)
    else:
        vals = tsallis(network, flow)
    return MeasureVector(kind, dict(vals))


def disruption_measures(
    network: Network, demand: DemandTable, routes, kind: MeasureKind, ctx: MeasureContext | None = None
) -> MeasureVector:
    if kind not in DISRUPTION_KINDS:
        raise ValueError(f"{kind.value} is not a disruption measure")
    ctx = ctx or MeasureContext(network, demand, routes)
    prof = ctx.disruption()
    if kind == K.AVERAGE_PATH_DISTANCE_AFTER_DISRUPTION:
        vals = prof.apd
    elif kind == K.PATH_DISTANCE_CHANGE:
        vals = prof.path_change
    elif kind == K.UNDELIVERED_DEMAND_AFTER_DISRUPTION:
        vals = prof.undelivered
    elif kind == K.WEIGHTED_NODE_AFTER_DISRUPTION:
        vals = prof.weighted_after
    else:
        ph = phi(ctx.flow())
        vals = {j: (None if prof.path_change[j] is None else ph[j] * prof.path_change[j]) for j in network.nodes}
    return MeasureVector(kind, dict(vals))


def compute(ctx: MeasureContext, kind: MeasureKind) -> MeasureVector:
    if kind in FLOW_KINDS:
        return flow_measures(ctx.network, ctx.flow(), kind, ctx.bc())
    if kind in DISRUPTION_KINDS:
        return disruption_measures(ctx.network, ctx.demand, ctx.routes, kind, ctx)
    return topological_measures(ctx.network, kind, ctx)


def compute_all(ctx: MeasureContext, kinds: Iterable[MeasureKind] | None = None) -> dict[MeasureKind, MeasureVector]:
    kinds = list(MeasureKind) if kinds is None else list(kinds)
    return {k: compute(ctx, k) for k in kinds}


# -- export -----------------------------------------------------------------


def _cell(v) -> str:
    return "" if v is None else format(v, ".17g")


def to_long_csv(vectors: Mapping[MeasureKind, MeasureVector]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["measure", "node", "value", "category"])
    for kind, vec in vectors.items():
        for node in sorted(vec.values):
            w.writerow([kind.value, node, _cell(vec.values[node]), kind.category.value])
    return buf.getvalue()


def to_matrix_csv(vectors: Mapping[MeasureKind, MeasureVector]) -> str:
    kinds = list(vectors)
    nodes = sorted(next(iter(vectors.values())).values) if vectors else []
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["node"] + [k.value for k in kinds])
    for n in nodes:
        w.writerow([n] + [_cell(vectors[k].values.get(n)) for k in kinds])
    return buf.getvalue()


def to_json(vectors: Mapping[MeasureKind, MeasureVector]) -> str:
    nodes = sorted(next(iter(vectors.values())).values) if vectors else []
    return json.dumps(
        {
            "nodes": nodes,
            "measures": {
                k.value: {"category": k.category.value, "values": [vectors[k].values.get(n) for n in nodes]}
                for k in vectors
            },
        },
        indent=1,
    )


def ranking_csv(vectors: Mapping[MeasureKind, MeasureVector], top_m: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["measure", "rank", "node", "value"])
    for kind, vec in vectors.items():
        for r, (node, val) in enumerate(rank_nodes(vec, min(top_m, len(vec.values))), start=1):
            w.writerow([kind.value, r, node, _cell(val)])
    return buf.getvalue()
