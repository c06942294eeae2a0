import itertools
import json
import math
import random
import time
from pathlib import Path as FsPath

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fortifynet.kshortest import (
    RouteSet,
    build_route_sets,
    dijkstra_to_target,
    free_flow_weights,
    k_shortest_paths,
    route_weights,
)
from fortifynet.network import Link, Network, sioux_falls, sioux_falls_demand

PUBLISHED = json.loads((FsPath(__file__).parent / "data" / "published_routes.json").read_text())


def published_by_pair():
    out = {}
    for row in PUBLISHED:
        out.setdefault((row["origin"], row["destination"]), []).append(tuple(row["nodes"]))
    return out


def test_hop_routes_match_published_lists_in_order():
    net, dem = sioux_falls(), sioux_falls_demand()
    routes = build_route_sets(net, dem, k=10)
    ref = published_by_pair()
    assert set(routes.pairs) == set(ref)
    for pair, paths in ref.items():
        assert [p.nodes for p in routes[pair]] == paths


def test_route_building_is_fast():
    net, dem = sioux_falls(), sioux_falls_demand()
    t = time.perf_counter()
    build_route_sets(net, dem, route_weights(net, "free-flow"), k=10)
    assert time.perf_counter() - t < 1.0


def diamond():
    links = [Link(1, 1, 2, 1, 1), Link(2, 2, 4, 1, 1), Link(3, 1, 3, 1, 1), Link(4, 3, 4, 2, 1), Link(5, 2, 3, 1, 1)]
    return Network([1, 2, 3, 4], links)


def test_diamond_paths_by_hand():
    net = diamond()
    paths = k_shortest_paths(net, free_flow_weights(net), 1, 4, 5)
    assert [(p.nodes, p.cost) for p in paths] == [((1, 2, 4), 2.0), ((1, 3, 4), 3.0), ((1, 2, 3, 4), 4.0)]


def test_dijkstra_unreachable_is_infinite():
    net = Network([1, 2, 3], [Link(1, 1, 2, 1, 1)])
    dist, pred = dijkstra_to_target(net, None, 2)
    assert dist == {1: 1.0, 2: 0.0, 3: math.inf}
    assert pred[1] == 1 and pred[3] is None


def test_errors():
    net = diamond()
    with pytest.raises(ValueError):
        k_shortest_paths(net, None, 1, 4, 0)
    with pytest.raises(KeyError):
        k_shortest_paths(net, None, 1, 99, 1)
    with pytest.raises(ValueError):
        k_shortest_paths(net, {l.id: -1.0 for l in net.links}, 1, 4, 1)
    assert k_shortest_paths(net, None, 4, 1, 3) == []
    assert k_shortest_paths(net, None, 2, 2, 3)[0].nodes == (2,)


def test_route_set_json_round_trip():
    net, dem = sioux_falls(), sioux_falls_demand()
    routes = build_route_sets(net, dem)
    assert RouteSet.from_json(routes.to_json(), net) == routes
    assert routes.total_routes() == 160


def all_simple_costs(net, w, s, t):
    costs = []

    def walk(v, seen, c):
        if v == t:
            costs.append(c)
            return
        for lid in net.out_links(v):
            h = net.link(lid).head
            if h not in seen:
                walk(h, seen | {h}, c + w[lid])

    walk(s, {s}, 0)
    return sorted(costs)


@st.composite
def graphs(draw):
    n = draw(st.integers(2, 6))
    arcs = draw(st.sets(st.sampled_from(list(itertools.permutations(range(1, n + 1), 2))), min_size=1))
    arcs = sorted(arcs)
    w = draw(st.lists(st.integers(1, 5), min_size=len(arcs), max_size=len(arcs)))
    net = Network(range(1, n + 1), [Link(k + 1, a, b, 1, 1) for k, (a, b) in enumerate(arcs)])
    return net, {k + 1: float(x) for k, x in enumerate(w)}, n


@settings(max_examples=150, deadline=None)
@given(graphs(), st.integers(1, 8))
def test_k_cheapest_simple_paths_match_enumeration(g, k):
    net, w, n = g
    ref = all_simple_costs(net, w, 1, n)
    paths = k_shortest_paths(net, w, 1, n, k)
    assert [p.cost for p in paths] == ref[:k]
    for p in paths:
        assert len(set(p.nodes)) == len(p.nodes)
        assert p.nodes[0] == 1 and p.nodes[-1] == n
        assert p.cost == sum(w[l] for l in p.links)
    assert len({p.nodes for p in paths}) == len(paths)
