"""Solve the undisrupted Sioux Falls routing model and list max route times per OD pair."""

import time

from fortifynet.kshortest import build_route_sets
from fortifynet.network import sioux_falls, sioux_falls_demand, sioux_falls_fortification
from fortifynet.pipeline import Problem, od_max_times, solve_baseline

net, dem = sioux_falls(), sioux_falls_demand()
problem = Problem(net, dem, build_route_sets(net, dem, k=10), fort=sioux_falls_fortification())

t0 = time.perf_counter()
run = solve_baseline(problem)
sol = run.solution
print(f"status {run.raw.status}, objective {sol.objective:.6f}, {time.perf_counter() - t0:.1f} s")
base = sol.scenarios[0]
print(f"max route time z = {base.z:.2f}, undelivered {base.total_undelivered:.0f} of {dem.total():.0f}")

times = od_max_times(sol, problem.routes)
for (o, d), t in sorted(times.items(), key=lambda kv: kv[1]):
    print(f"  ({o:>2},{d:>2})  {t:10.2f}")
