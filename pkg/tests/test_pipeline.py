import csv
import io

import pytest

from fortifynet.bpr import BprParams
from fortifynet.kshortest import build_route_sets
from fortifynet.models import RiskParams, build_model
from fortifynet.network import DemandTable, FortificationParams, Link, Network
from fortifynet.pipeline import (
    Problem,
    initial_point,
    mean_relative_undelivered,
    od_max_times,
    overlap,
    route_flow_table,
    scenario_table,
    solve_baseline,
    solve_kind,
    stochastic_weights,
    undelivered_table,
)
from fortifynet.scenarios import Scenario, ScenarioSet


def problem():
    links = [Link(1, 1, 2, 2, 4), Link(2, 2, 4, 2, 4), Link(3, 1, 3, 3, 6), Link(4, 3, 4, 3, 6)]
    net = Network([1, 2, 3, 4], links)
    dem = DemandTable({(1, 4): 6.0, (1, 2): 2.0}, 1.0)
    routes = build_route_sets(net, dem, k=3)
    sc = ScenarioSet([Scenario("a", None, {2: 0.6}, 0.6), Scenario("b", None, {3: 0.6}, 0.4)])
    fort = FortificationParams({i: 1.0 for i in net.nodes}, 1)
    return Problem(net, dem, routes, sc, fort, BprParams())


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_baseline_calibrates_time_scale():
    p = problem()
    base = solve_baseline(p)
    W = stochastic_weights(p)
    assert W.z_normalizer == pytest.approx(base.solution.scenarios[0].z)
    assert p.base_flows


def test_relative_undelivered_recomputed_from_flow_table():
    p = problem()
    run = solve_kind("rn", p)
    sol = run.solution
    total = p.demand.total()
    table = rows(scenario_table(sol, total))
    assert [r["scenario"] for r in table] == ["a", "b"]
    und = rows(undelivered_table(sol, p.demand))
    for r in table:
        lost = sum(float(u["undelivered"]) for u in und if u["scenario"] == r["scenario"])
        assert float(r["relative_undelivered"]) == pytest.approx(lost / total, abs=1e-9)
        assert 0.0 <= float(r["relative_undelivered"]) <= 1.0
    flows = rows(route_flow_table(sol, p.routes))
    assert len(flows) == 2 * p.routes.total_routes()
    assert mean_relative_undelivered(sol, total) == pytest.approx(
        sum(float(r["relative_undelivered"]) for r in table) / 2)


def test_risk_averse_costs_at_least_risk_neutral_expectation():
    p = problem()
    W = stochastic_weights(p)
    rn = solve_kind("rn", p, weights=W)
    ra = solve_kind("ra", p, risk=RiskParams(0.1, 1.0), weights=W)
    assert ra.solution.objective >= rn.solution.objective - 1e-6


def test_warm_start_does_not_change_optimum():
    p = problem()
    with_start = solve_kind("rn", p).solution.objective
    p.use_warm_start = False
    assert solve_kind("rn", p).solution.objective == pytest.approx(with_start, abs=1e-6)


@pytest.mark.parametrize("kind", ["rn", "ra", "rnra"])
def test_relaxed_start_is_optimal_when_no_fortification_is_allowed(kind):
    p = problem()
    p.fort = FortificationParams(p.fort.cost, 0)
    W = stochastic_weights(p)
    risk = None if kind == "rn" else RiskParams(0.5, 0.4)
    m = build_model(kind, p.network, p.demand, p.routes, p.scenarios, p.fort, p.bpr, W, risk=risk)
    start = initial_point(m, p)
    start_obj = sum(c * start[k] for k, c in m.objective.terms.items())
    best = solve_kind(kind, p, risk=risk, weights=W).solution.objective
    assert start_obj == pytest.approx(best, abs=1e-6)


def test_od_max_times_cover_all_pairs():
    p = problem()
    sol = solve_baseline(p).solution
    times = od_max_times(sol, p.routes)
    assert set(times) == {(1, 4), (1, 2)}
    assert times[(1, 2)] < times[(1, 4)]


def test_overlap():
    assert overlap({6, 8, 11, 20}, {6, 8, 11, 20}) == 1.0
    assert overlap({6, 8}, {8, 9}) == pytest.approx(1 / 3)
    assert overlap(set(), set()) == 1.0
