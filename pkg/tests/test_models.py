import warnings

from hypothesis import given, settings
from hypothesis import strategies as st

import pytest

from fortifynet.bpr import BprParams
from fortifynet.kshortest import build_route_sets
from fortifynet.models import (
    ObjectiveWeights,
    RiskParams,
    build_baseline,
    build_model,
    extract_solution,
    link_upper_bounds,
    manifest,
    pla_slack,
)
from fortifynet.network import DemandTable, FortificationParams, Link, Network
from fortifynet.oracle import cvar_sorted, grid_slack, oracle_solve
from fortifynet.scenarios import Scenario, ScenarioSet
from fortifynet.solver import SolverConfig, solve
from tiny import tiny_instance

EXACT = SolverConfig(gap_tolerance=1e-9)


def run(model):
    raw = solve(model, EXACT)
    assert raw.status == "optimal"
    return extract_solution(model, raw)


def two_route_instance():
    links = [Link(1, 1, 2, 2, 4), Link(2, 2, 4, 2, 4), Link(3, 1, 3, 3, 6), Link(4, 3, 4, 3, 6)]
    net = Network([1, 2, 3, 4], links)
    dem = DemandTable({(1, 4): 6.0}, 1.0)
    return net, dem, build_route_sets(net, dem, k=3)


def weights_for(dem):
    return ObjectiveWeights(0.5, 0.5, 0.1, z_normalizer=10.0, demand_normalizer=dem.total(), cost_normalizer=1.0)


def test_baseline_solution_invariants():
    net, dem, routes = two_route_instance()
    sol = run(build_baseline(net, dem, routes, weights=weights_for(dem)))
    assert sol.violations == []
    s = sol.scenarios[0]
    assert 0 <= s.total_undelivered <= 6.0 + 1e-9
    assert sum(s.flows.values()) + s.total_undelivered == pytest.approx(6.0)
    assert s.z >= max(s.route_time.values()) - 1e-7


def test_undisrupted_scenario_equals_baseline():
    net, dem, routes = two_route_instance()
    W = weights_for(dem)
    base = run(build_baseline(net, dem, routes, weights=W))
    calm = ScenarioSet([Scenario("calm", None, {2: 0.0}, 1.0)])
    fort = FortificationParams({i: 1.0 for i in net.nodes}, 0)
    rn = run(build_model("rn", net, dem, routes, calm, fort, weights=W))
    assert rn.objective == pytest.approx(base.objective, abs=1e-7)


def test_full_mitigation_never_hurts():
    net, dem, routes = two_route_instance()
    W = weights_for(dem).replace(w3=0.0)
    sc = ScenarioSet([Scenario("a", None, {2: 0.6}, 0.5, 1.0), Scenario("b", None, {3: 0.5}, 0.5, 1.0)])
    none = run(build_model("rn", net, dem, routes, sc, FortificationParams({i: 1.0 for i in net.nodes}, 0),
                           weights=W))
    full = run(build_model("rn", net, dem, routes, sc, FortificationParams({i: 1.0 for i in net.nodes}, 4),
                           weights=W))
    assert full.objective <= none.objective + 1e-9


def test_disruption_raises_link_time_on_affected_link():
    net, dem, routes = two_route_instance()
    W = weights_for(dem)
    sc = ScenarioSet([Scenario("hit", None, {2: 0.5}, 1.0, 0.0)])
    fort = FortificationParams({i: 1.0 for i in net.nodes}, 0)
    sol = run(build_model("rn", net, dem, routes, sc, fort, weights=W))
    s = sol.scenarios[0]
    assert s.residual_capacity[1] == pytest.approx(2.0)
    assert s.residual_capacity[3] == pytest.approx(6.0)
    assert sol.violations == []


@pytest.mark.parametrize("seed", range(6))
def test_matches_oracle_on_tiny_instances(seed):
    kind = ("rn", "ra", "rnra")[seed % 3]
    net, dem, routes, sc, fort, W, risk = tiny_instance(seed, kind)
    m = build_model(kind, net, dem, routes, sc, fort, BprParams(), W, pla_segments=20, risk=risk)
    sol = run(m)
    ref, _ = oracle_solve(net, dem, routes, sc, fort, BprParams(), W, risk, flow_grid=0.25, kind=kind)
    diff = sol.objective - ref
    assert -grid_slack(dem, routes, W, 0.25) - 1e-6 <= diff <= pla_slack(m.meta["context"]) + 1e-6
    assert sol.violations == []


def test_cvar_term_equals_sorted_cvar():
    net, dem, routes, sc, fort, W, _ = tiny_instance(4, "ra")
    risk = RiskParams(0.5, 1.0)
    sol = run(build_model("ra", net, dem, routes, sc, fort, weights=W, risk=risk))
    costs = sol.scenario_costs()
    term = sol.v + sum(p * sol.tau[s] for s, p in zip(sc.ids, sc.probabilities)) / risk.epsilon
    assert term == pytest.approx(cvar_sorted(costs, sc.probabilities, risk.epsilon), abs=1e-6)


def test_hybrid_endpoints():
    net, dem, routes, sc, fort, W, _ = tiny_instance(2, "rnra")
    rn = run(build_model("rn", net, dem, routes, sc, fort, weights=W))
    ra = run(build_model("ra", net, dem, routes, sc, fort, weights=W, risk=RiskParams(0.1, 1.0)))
    h0 = run(build_model("rnra", net, dem, routes, sc, fort, weights=W, risk=RiskParams(0.1, 0.0)))
    h1 = run(build_model("rnra", net, dem, routes, sc, fort, weights=W, risk=RiskParams(0.1, 1.0)))
    assert h0.objective == pytest.approx(rn.objective, abs=1e-6)
    assert h1.objective == pytest.approx(ra.objective, abs=1e-6)


def test_budget_respected():
    net, dem, routes = two_route_instance()
    sc = ScenarioSet([Scenario("a", None, {1: 0.7, 2: 0.7, 3: 0.7, 4: 0.7}, 1.0, 1.0)])
    W = weights_for(dem).replace(w3=0.0)
    sol = run(build_model("rn", net, dem, routes, sc, FortificationParams({i: 1.0 for i in net.nodes}, 1),
                          weights=W))
    assert len(sol.fortified) <= 1


def test_full_disruption_is_clamped_and_closes_link():
    net, dem, routes = two_route_instance()
    sc = ScenarioSet([Scenario("cut", None, {2: 1.0}, 1.0, 0.5)])
    fort = FortificationParams({i: 1.0 for i in net.nodes}, 0)
    with pytest.warns(RuntimeWarning, match="clamped"):
        m = build_model("rn", net, dem, routes, sc, fort, weights=weights_for(dem))
    sol = run(m)
    s = sol.scenarios[0]
    assert s.link_flow[1] == pytest.approx(0.0, abs=1e-6)
    assert s.link_flow[2] == pytest.approx(0.0, abs=1e-6)


def test_input_checks():
    net, dem, routes = two_route_instance()
    fort = FortificationParams({i: 1.0 for i in net.nodes}, 0)
    bad = ScenarioSet([Scenario("a", None, {2: 0.5}, 0.4)])
    with pytest.raises(ValueError, match="sum to 1"):
        build_model("rn", net, dem, routes, bad, fort)
    dotted = ScenarioSet([Scenario("a.b", None, {2: 0.5}, 1.0)])
    with pytest.raises(ValueError):
        build_model("rn", net, dem, routes, dotted, fort)
    with pytest.raises(ValueError):
        build_model("nope", net, dem, routes, dotted, fort)


def test_upper_bounds_and_manifest():
    net, dem, routes = two_route_instance()
    assert link_upper_bounds(net, dem, routes) == {1: 6.0, 2: 6.0, 3: 6.0, 4: 6.0}
    m = build_baseline(net, dem, routes, weights=weights_for(dem))
    man = manifest(m, {"net": "abc"})
    assert man["kind"] == "baseline" and man["inputs"] == {"net": "abc"}
    assert m.validate() == []


def test_objective_expression_reproduces_solver_objective():
    net, dem, routes, sc, fort, W, risk = tiny_instance(7, "rnra")
    m = build_model("rnra", net, dem, routes, sc, fort, weights=W, risk=risk)
    raw = solve(m, EXACT)
    plugged = sum(c * raw.values[k] for k, c in m.objective.terms.items()) + m.objective.constant
    assert plugged == pytest.approx(raw.objective, abs=1e-6)


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([0.25, 0.5, 0.75]))
def test_hybrid_interpolates_between_endpoints(seed, delta):
    net, dem, routes, sc, fort, W, _ = tiny_instance(seed, "ra")
    objs = {}
    for kind, d in [("rn", None), ("ra", 1.0), ("rnra", delta), ("rnra", 0.0), ("rnra", 1.0)]:
        risk = None if d is None else RiskParams(0.5, d)
        objs[(kind, d)] = run(build_model(kind, net, dem, routes, sc, fort, weights=W, risk=risk)).objective
    rn, ra = objs[("rn", None)], objs[("ra", 1.0)]
    assert objs[("rnra", 0.0)] == pytest.approx(rn, abs=1e-6)
    assert objs[("rnra", 1.0)] == pytest.approx(ra, abs=1e-6)
    assert objs[("rnra", delta)] >= (1 - delta) * rn + delta * ra - 1e-6


@settings(max_examples=6, deadline=None)
@given(st.integers(0, 10_000))
def test_budget_monotone_without_cost_weight(seed):
    net, dem, routes, sc, fort, W, _ = tiny_instance(seed, "rn")
    W = W.replace(w3=0.0)
    objs = []
    for nf in range(3):
        budget = FortificationParams(fort.cost, nf)
        objs.append(run(build_model("rn", net, dem, routes, sc, budget, weights=W)).objective)
    assert all(b <= a + 1e-6 for a, b in zip(objs, objs[1:]))
