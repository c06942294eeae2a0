"""Random tiny instances small enough for the brute-force oracle."""

import random

from fortifynet.kshortest import build_route_sets
from fortifynet.models import ObjectiveWeights, RiskParams
from fortifynet.network import DemandTable, FortificationParams, Link, Network
from fortifynet.scenarios import Scenario, ScenarioSet

# Candidate arcs on 4 nodes; 1 -> 4 always has at least two routes.
ARCS = [(1, 2), (2, 4), (1, 3), (3, 4), (2, 3), (1, 4), (3, 2)]


def tiny_instance(seed: int, kind: str = "rn"):
    rng = random.Random(seed)
    extra = rng.sample(ARCS[4:], rng.randint(0, 2))
    arcs = ARCS[:4] + extra
    links = [
        Link(k + 1, a, b, float(rng.randint(1, 5)), float(rng.randint(2, 6)))
        for k, (a, b) in enumerate(arcs)
    ]
    net = Network([1, 2, 3, 4], links)
    demand = DemandTable({(1, 4): float(rng.randint(3, 8))}, 1.0)
    routes = build_route_sets(net, demand, k=3)
    n_sc = rng.randint(1, 2)
    raw = []
    for s in range(n_sc):
        hit = rng.sample([1, 2, 3, 4], rng.randint(1, 2))
        raw.append((f"s{s}", {n: round(rng.uniform(0.2, 0.8), 2) for n in hit}, rng.uniform(0.2, 1.0)))
    tot = sum(p for *_, p in raw)
    gamma = rng.choice([0.0, 0.5, 1.0])
    scenarios = ScenarioSet(
        [Scenario(i, None, aff, p / tot, gamma_default=gamma) for i, aff, p in raw]
    )
    fort = FortificationParams({i: float(rng.randint(1, 3)) for i in net.nodes}, rng.randint(0, 2))
    weights = ObjectiveWeights(
        rng.uniform(0.2, 1.0), rng.uniform(0.2, 1.0), rng.uniform(0.0, 0.3),
        z_normalizer=20.0, demand_normalizer=demand.total(), cost_normalizer=3.0,
    )
    risk = None if kind == "rn" else RiskParams(rng.choice([0.1, 0.5]), 1.0 if kind == "ra" else rng.random())
    return net, demand, routes, scenarios, fort, weights, risk
