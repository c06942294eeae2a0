"""Loopless K-shortest paths and per-OD route sets.

The search is the reduced-cost best-first scheme: run Dijkstra *to* the
target once, then grow partial paths from the source in a priority queue
keyed by ``cost_so_far + dist[head]``. A partial path never revisits a node,
so every path popped at the target is loopless and popped paths come out in
nondecreasing cost order.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass
from typing import Mapping

from .network import DemandTable, Network

Weights = Mapping[int, float]

# Equal-cost comparisons in tie-breaking; costs are rounded to this many decimals.
_COST_DECIMALS = 9


def free_flow_weights(network: Network) -> dict[int, float]:
    return {l.id: l.free_flow_time for l in network.links}


def unit_weights(network: Network) -> dict[int, float]:
    """Hop-count weights. Reproduces the published Sioux Falls route lists."""
    return {l.id: 1.0 for l in network.links}


def route_weights(network: Network, kind: str = "hops") -> dict[int, float]:
    if kind in ("hops", "unit"):
        return unit_weights(network)
    if kind in ("free-flow", "free_flow", "fftt"):
        return free_flow_weights(network)
    raise ValueError(f"unknown route weighting {kind!r}")


@dataclass(frozen=True)
class Path:
    nodes: tuple[int, ...]
    links: tuple[int, ...]
    cost: float

    @property
    def edges(self) -> list[tuple[int, int]]:
        return list(zip(self.nodes, self.nodes[1:]))

    def __len__(self):
        return len(self.links)


def _check_weights(network: Network, weights: Weights) -> None:
    for l in network.links:
        w = weights[l.id]
        if w < 0 or math.isnan(w):
            raise ValueError(f"negative weight {w} on link {l.id}")


def dijkstra_to_target(
    network: Network, weights: Weights | None, target: int
) -> tuple[dict[int, float], dict[int, int | None]]:
    """Shortest distances from every node *to* ``target``.

    Returns ``(dist, pred)``; ``pred[v]`` is the first link of a shortest
    ``v -> target`` path (``None`` at the target and at unreachable nodes).
    Unreachable nodes get ``math.inf``.
    """
    if weights is None:
        weights = free_flow_weights(network)
    _check_weights(network, weights)
    if target not in network:
        raise KeyError(f"unknown node {target}")
    dist = {i: math.inf for i in network.nodes}
    pred: dict[int, int | None] = {i: None for i in network.nodes}
    dist[target] = 0.0
    heap = [(0.0, target)]
    done = set()
    while heap:
        d, v = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        for lid in network.in_links(v):
            link = network.link(lid)
            nd = d + weights[lid]
            if nd < dist[link.tail]:
                dist[link.tail] = nd
                pred[link.tail] = lid
                heapq.heappush(heap, (nd, link.tail))
    return dist, pred


def k_shortest_paths(
    network: Network, weights: Weights | None, source: int, target: int, k: int
) -> list[Path]:
    """Up to ``k`` loopless ``source -> target`` paths, cheapest first.

    Equal-cost paths are ordered by their node sequence.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    for node in (source, target):
        if node not in network:
            raise KeyError(f"unknown node {node}")
    if weights is None:
        weights = free_flow_weights(network)
    if source == target:
        return [Path((source,), (), 0.0)]

    dist, _ = dijkstra_to_target(network, weights, target)
    if math.isinf(dist[source]):
        return []

    found: list[Path] = []
    # Queue entries: (reduced cost, node sequence, link sequence, exact cost).
    queue = [(dist[source], (source,), (), 0.0)]
    while queue:
        key, nodes, links, cost = heapq.heappop(queue)
        if len(found) >= k:
            kth = sorted(round(p.cost, _COST_DECIMALS) for p in found)[k - 1]
            if round(key, _COST_DECIMALS) > kth:
                break
        node = nodes[-1]
        if node == target:
            found.append(Path(nodes, links, cost))
            continue
        for lid in network.out_links(node):
            v = network.link(lid).head
            # A repeated node would close a cycle; this also excludes repeated edges.
            if v in nodes or math.isinf(dist[v]):
                continue
            w = weights[lid]
            new_key = key + w - dist[node] + dist[v]
            heapq.heappush(queue, (new_key, nodes + (v,), links + (lid,), cost + w))

    found.sort(key=lambda p: (round(p.cost, _COST_DECIMALS), p.nodes))
    return found[:k]


class RouteSet:
    """Candidate routes per OD pair; route ``r`` is 1-based in model names."""

    def __init__(self, routes: Mapping[tuple[int, int], list[Path]]):
        self._routes = {pair: tuple(paths) for pair, paths in routes.items()}

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return list(self._routes)

    def __getitem__(self, pair: tuple[int, int]) -> tuple[Path, ...]:
        return self._routes[pair]

    def __contains__(self, pair):
        return pair in self._routes

    def items(self):
        return self._routes.items()

    def link_membership(self, pair: tuple[int, int], r: int) -> frozenset[int]:
        """Link ids of route ``r`` (1-based) of ``pair``."""
        return frozenset(self._routes[pair][r - 1].links)

    def used_links(self) -> set[int]:
        return {lid for paths in self._routes.values() for p in paths for lid in p.links}

    def pairs_using(self, link_id: int) -> list[tuple[int, int]]:
        return [pair for pair, paths in self._routes.items() if any(link_id in p.links for p in paths)]

    def total_routes(self) -> int:
        return sum(len(v) for v in self._routes.values())

    def to_json(self) -> str:
        return json.dumps(
            {f"({o},{d})": [[list(e) for e in p.edges] for p in paths] for (o, d), paths in self._routes.items()},
            indent=1,
        )

    @classmethod
    def from_json(cls, text: str, network: Network, weights: Weights | None = None) -> "RouteSet":
        if weights is None:
            weights = free_flow_weights(network)
        raw = json.loads(text)
        routes = {}
        for key, paths in raw.items():
            o, d = (int(x) for x in key.strip("()").split(","))
            built = []
            for edges in paths:
                links = []
                for tail, head in edges:
                    lid = network.link_between(tail, head)
                    if lid is None:
                        raise ValueError(f"route of ({o},{d}) uses missing link ({tail},{head})")
                    links.append(lid)
                nodes = (edges[0][0],) + tuple(h for _, h in edges) if edges else (o,)
                built.append(Path(nodes, tuple(links), sum(weights[l] for l in links)))
            routes[(o, d)] = built
        return cls(routes)

    def __eq__(self, other):
        if not isinstance(other, RouteSet):
            return NotImplemented
        return {p: [r.links for r in v] for p, v in self._routes.items()} == {
            p: [r.links for r in v] for p, v in other._routes.items()
        }


def build_route_sets(
    network: Network, demand: DemandTable, weights: Weights | None = None, k: int = 10
) -> RouteSet:
    """K loopless routes for every OD pair of ``demand`` (hop weights by default)."""
    if weights is None:
        weights = unit_weights(network)
    routes = {}
    for o, d in demand.pairs:
        paths = k_shortest_paths(network, weights, o, d, k)
        if not paths:
            raise ValueError(f"OD pair ({o}, {d}) is disconnected")
        routes[(o, d)] = paths
    return RouteSet(routes)
