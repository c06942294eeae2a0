"""Rank Sioux Falls nodes by a few vulnerability measures and build scenarios from them."""

from fortifynet.kshortest import build_route_sets
from fortifynet.measures import MeasureContext, MeasureKind, compute, rank_nodes
from fortifynet.network import sioux_falls, sioux_falls_demand
from fortifynet.scenarios import generate_from_measures

net, dem = sioux_falls(), sioux_falls_demand()
ctx = MeasureContext(net, dem, build_route_sets(net, dem))

vectors = {}
for kind in (MeasureKind.DEGREE_CENTRALITY, MeasureKind.PAGE_RANK, MeasureKind.BETWEENNESS_CENTRALITY,
             MeasureKind.EXPOSURE):
    vectors[kind] = compute(ctx, kind)
    top = rank_nodes(vectors[kind], 5)
    print(f"{kind.value:>24}: " + ", ".join(f"{n} ({v:.3g})" for n, v in top))

# Each measure's top nodes become one disruption scenario; probabilities are normalized.
scenarios = generate_from_measures(list(vectors.values()), 4, (0.7, 0.65, 0.6, 0.6))
for s in scenarios:
    print(s.id, dict(s.affected), f"p={s.probability:.3f}")
