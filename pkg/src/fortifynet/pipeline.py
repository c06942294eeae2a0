"""Glue between builders, the solver bridge and report tables."""

from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass, field

from .bpr import BprParams
from .models import (
    DEFAULT_PLA_SEGMENTS,
    ObjectiveWeights,
    RiskParams,
    Solution,
    baseline_weights,
    build_baseline,
    build_model,
    extract_solution,
    feasible_point,
    fixed_relaxation,
    route_flows,
    warm_start,
)
from .solver import RawSolution, SolverConfig, solve


class SolveFailed(RuntimeError):
    def __init__(self, raw: RawSolution):
        super().__init__(f"solver status {raw.status}: {raw.log.strip()[:500]}")
        self.raw = raw


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


@dataclass
class Problem:
    """Everything a solve needs apart from the model kind."""

    network: object
    demand: object
    routes: object
    scenarios: object = None
    fort: object = None
    bpr: BprParams = field(default_factory=BprParams)
    w: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    pla_segments: int = DEFAULT_PLA_SEGMENTS
    big_m: float | None = None
    z_normalizer: float | None = None
    # Hand the solver a feasible start: nothing fortified, best flows for that plan.
    use_warm_start: bool = True
    base_flows: dict | None = None
    start_flows: dict = field(default_factory=dict)


@dataclass
class Run:
    kind: str
    model: object
    raw: RawSolution
    solution: Solution | None
    weights: ObjectiveWeights
    risk: RiskParams | None = None


def solve_baseline(problem: Problem, config: SolverConfig | None = None) -> Run:
    w1, w2, w3 = problem.w
    W = baseline_weights(problem.network, problem.demand, problem.routes, w1, w2, w3, problem.fort)
    m = build_baseline(problem.network, problem.demand, problem.routes, problem.bpr, W, problem.pla_segments)
    raw = solve(m, config)
    sol = extract_solution(m, raw) if raw.status in ("optimal", "feasible") else None
    return Run("baseline", m, raw, sol, W)


def stochastic_weights(problem: Problem, config: SolverConfig | None = None) -> ObjectiveWeights:
    """Normalizers for the scenario models; the time scale is the baseline optimum's max route time."""
    w1, w2, w3 = problem.w
    W = baseline_weights(problem.network, problem.demand, problem.routes, w1, w2, w3, problem.fort)
    if problem.z_normalizer is not None:
        return W.replace(z_normalizer=problem.z_normalizer)
    base = solve_baseline(problem, config)
    if base.solution is None:
        raise SolveFailed(base.raw)
    z = max(base.solution.scenarios[0].z, 1e-9)
    problem.z_normalizer = z
    problem.base_flows = dict(base.solution.scenarios[0].flows)
    return W.replace(z_normalizer=z)


def initial_point(model, problem: Problem, config: SolverConfig | None = None, fortified=()) -> dict[str, float]:
    """Best second stage for a fixed plan, else scaled baseline flows.

    With the plan fixed, scenarios no longer interact and every objective
    here is nondecreasing in each scenario's cost, so the risk-neutral
    relaxation's flows are optimal for the risk-averse and hybrid models too.
    """
    ctx = model.meta["context"]
    key = (frozenset(fortified), ctx.weights)
    if key not in problem.start_flows:
        rn = model if ctx.kind == "rn" else build_model(
            "rn", problem.network, problem.demand, problem.routes, problem.scenarios, problem.fort,
            problem.bpr, ctx.weights, problem.pla_segments, problem.big_m,
        )
        raw = solve(fixed_relaxation(rn, fortified), config)
        problem.start_flows[key] = route_flows(rn, raw.values) if raw.status == "optimal" else None
    flows = problem.start_flows[key]
    if flows is None:
        return warm_start(model, problem.base_flows)
    return feasible_point(model, fortified, flows)


def solve_kind(kind: str, problem: Problem, config=None, risk: RiskParams | None = None, weights=None) -> Run:
    if kind == "baseline":
        return solve_baseline(problem, config)
    weights = weights or stochastic_weights(problem, config)
    if kind in ("ra", "rnra") and risk is None:
        risk = RiskParams()
    m = build_model(
        kind, problem.network, problem.demand, problem.routes, problem.scenarios, problem.fort,
        problem.bpr, weights, problem.pla_segments, problem.big_m, risk,
    )
    start = initial_point(m, problem, config) if problem.use_warm_start else None
    raw = solve(m, config, start)
    sol = extract_solution(m, raw) if raw.status in ("optimal", "feasible") else None
    return Run(kind, m, raw, sol, weights, risk)


# -- tables ------------------------------------------------------------------


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return format(x, ".10g")
    return str(x)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def scenario_rows(sol: Solution, total_demand: float):
    rows = []
    for s in sol.scenarios:
        rel = s.total_undelivered / total_demand if total_demand > 0 else 0.0
        rows.append((s.id or "baseline", s.probability, min(max(rel, 0.0), 1.0), s.total_travel_time(), s.z))
    return rows


def scenario_table(sol: Solution, total_demand: float) -> str:
    return _csv(
        ["scenario", "probability", "relative_undelivered", "total_travel_time", "max_travel_time"],
        scenario_rows(sol, total_demand),
    )


def route_flow_table(sol: Solution, routes) -> str:
    rows = []
    for s in sol.scenarios:
        for (o, d, r), f in s.flows.items():
            path = "-".join(str(n) for n in routes[(o, d)][r - 1].nodes)
            rows.append((s.id or "baseline", o, d, r, path, f, s.exact_route_time[(o, d, r)]))
    return _csv(["scenario", "origin", "destination", "route", "nodes", "flow", "travel_time"], rows)


def undelivered_table(sol: Solution, demand) -> str:
    rows = []
    for s in sol.scenarios:
        for (o, d), u in s.undelivered.items():
            rows.append((s.id or "baseline", o, d, demand.demand(o, d), u))
    return _csv(["scenario", "origin", "destination", "demand", "undelivered"], rows)


def od_max_times(sol: Solution, routes, used_only: bool = False) -> dict[tuple[int, int], float]:
    """Max exact route travel time per OD pair, averaged over scenarios by probability."""
    out = {}
    for pair in routes.pairs:
        acc = 0.0
        for s in sol.scenarios:
            times = [
                s.exact_route_time[(pair[0], pair[1], r)]
                for r in range(1, len(routes[pair]) + 1)
                if not used_only or s.flows[(pair[0], pair[1], r)] > 1e-6
            ]
            acc += s.probability * (max(times) if times else 0.0)
        out[pair] = acc
    return out


def od_max_table(sol: Solution, routes) -> str:
    all_routes = od_max_times(sol, routes)
    used = od_max_times(sol, routes, used_only=True)
    return _csv(
        ["origin", "destination", "max_travel_time", "max_travel_time_used_routes"],
        [(o, d, all_routes[(o, d)], used[(o, d)]) for o, d in routes.pairs],
    )


def mean_relative_undelivered(sol: Solution, total_demand: float, weighted: bool = False) -> float:
    """Mean over scenarios of relative undelivered demand (plain average unless ``weighted``)."""
    rel = [s.total_undelivered / total_demand for s in sol.scenarios]
    if weighted:
        return sum(s.probability * r for s, r in zip(sol.scenarios, rel))
    return sum(rel) / len(rel)


def overlap(found, reference) -> float:
    """Jaccard overlap of two node sets."""
    a, b = set(found), set(reference)
    return len(a & b) / len(a | b) if a | b else 1.0
