"""Compare risk-neutral, risk-averse and hybrid fortification plans.

Runs a 4-node network by default. Pass ``sioux SECONDS`` to run Sioux Falls with
the built-in catalog under a time limit per solve instead.
"""

import sys

from fortifynet.kshortest import build_route_sets
from fortifynet.models import RiskParams
from fortifynet.network import (
    DemandTable,
    FortificationParams,
    Link,
    Network,
    sioux_falls,
    sioux_falls_demand,
    sioux_falls_fortification,
)
from fortifynet.pipeline import Problem, mean_relative_undelivered, solve_kind, stochastic_weights
from fortifynet.scenarios import Scenario, ScenarioSet, builtin_catalog
from fortifynet.solver import SolverConfig


def small_problem():
    links = [Link(1, 1, 2, 2, 4), Link(2, 2, 4, 2, 4), Link(3, 1, 3, 3, 6), Link(4, 3, 4, 3, 6), Link(5, 2, 3, 1, 3)]
    net = Network([1, 2, 3, 4], links)
    dem = DemandTable({(1, 4): 8.0, (2, 4): 3.0}, 1.0)
    scenarios = ScenarioSet([
        Scenario("quiet", None, {2: 0.2}, 0.8),
        Scenario("storm", None, {2: 0.9, 3: 0.6}, 0.2),
    ])
    fort = FortificationParams({i: 1.0 for i in net.nodes}, 1)
    return Problem(net, dem, build_route_sets(net, dem, k=3), scenarios, fort, w=(0.2, 0.7, 0.1))


if len(sys.argv) > 1 and sys.argv[1] == "sioux":
    net, dem = sioux_falls(), sioux_falls_demand()
    problem = Problem(net, dem, build_route_sets(net, dem), builtin_catalog(), sioux_falls_fortification())
    config = SolverConfig(time_limit=float(sys.argv[2]) if len(sys.argv) > 2 else 120.0, gap_tolerance=1e-4)
else:
    problem, config = small_problem(), SolverConfig()

weights = stochastic_weights(problem, config)
total = problem.demand.total()
for kind, delta in [("rn", None), ("ra", 1.0), ("rnra", 0.5)]:
    risk = None if delta is None else RiskParams(0.1, delta)
    run = solve_kind(kind, problem, config, risk, weights)
    sol = run.solution
    label = kind if delta is None or kind == "ra" else f"{kind}({delta})"
    if sol is None:
        print(f"{label:>10}: no solution ({run.raw.status})")
        continue
    gap = "" if run.raw.gap is None else f" gap {run.raw.gap:.1e}"
    print(f"{label:>10}: {run.raw.status}{gap}, objective {sol.objective:.5f}, fortify {sorted(sol.fortified)}, "
          f"mean undelivered {mean_relative_undelivered(sol, total):.3f}")
    for s in sol.scenarios:
        print(f"{'':>12}{s.id}: cost {s.cost:.4f}, undelivered {s.total_undelivered:.2f}, z {s.z:.2f}")
