import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fortifynet.bpr import BprParams
from fortifynet.network import DemandTable, FortificationParams, Link, Network
from fortifynet.kshortest import build_route_sets
from fortifynet.models import ObjectiveWeights
from fortifynet.oracle import combo_count, cvar_sorted, oracle_solve
from tiny import tiny_instance


def test_cvar_of_two_point_distribution():
    # Outcomes 0 and 1 with equal mass: the worst half is all 1.
    assert cvar_sorted([0.0, 1.0], [0.5, 0.5], 0.5) == 1.0
    assert cvar_sorted([0.0, 1.0], [0.5, 0.5], 1.0) == 0.5
    assert cvar_sorted([3.0, 1.0, 2.0], [0.2, 0.5, 0.3], 0.1) == pytest.approx(3.0)
    # Tail of 0.4 takes all of 3 (0.2) and 0.2 of the 2 (0.3 available).
    assert cvar_sorted([3.0, 1.0, 2.0], [0.2, 0.5, 0.3], 0.4) == pytest.approx(2.5)


def test_cvar_rejects_bad_level():
    with pytest.raises(ValueError):
        cvar_sorted([1.0], [1.0], 0.0)


@settings(max_examples=100)
@given(st.lists(st.tuples(st.floats(-10, 10), st.floats(0.01, 1.0)), min_size=1, max_size=8),
       st.floats(0.05, 1.0))
def test_cvar_between_mean_and_max(pairs, eps):
    costs = [c for c, _ in pairs]
    total = sum(p for _, p in pairs)
    probs = [p / total for _, p in pairs]
    mean = sum(c * p for c, p in zip(costs, probs))
    val = cvar_sorted(costs, probs, eps)
    assert mean - 1e-9 <= val <= max(costs) + 1e-9


def test_single_link_baseline_by_hand():
    net = Network([1, 2], [Link(1, 1, 2, 10.0, 2.0)])
    dem = DemandTable({(1, 2): 2.0}, 1.0)
    routes = build_route_sets(net, dem, k=1)
    W = ObjectiveWeights(1.0, 0.0, 0.0, z_normalizer=1.0, demand_normalizer=2.0, cost_normalizer=1.0)
    # Only time matters, so nothing is sent: z is the free-flow time 10.
    obj, _ = oracle_solve(net, dem, routes, None, None, BprParams(), W, flow_grid=1.0)
    assert obj == pytest.approx(10.0)
    W = W.replace(w1=0.0, w2=1.0)
    obj, _ = oracle_solve(net, dem, routes, None, None, BprParams(), W, flow_grid=1.0)
    assert obj == 0.0


def test_size_caps():
    net, dem, routes, sc, fort, W, _ = tiny_instance(0)
    with pytest.raises(ValueError, match="grid"):
        oracle_solve(net, dem, routes, sc, fort, BprParams(), W, flow_grid=1e-4)
    assert combo_count(dem, routes, 1.0) >= 1
