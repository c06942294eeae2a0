"""Fortification models as MILPs: baseline, risk-neutral, CVaR and hybrid.

Every scenario gets its own copy of the routing block (route flows,
undelivered demand, link loads, PLA-linearized BPR times, route times and
the max-time variable). First-stage binaries ``x(i)`` pick the nodes to
fortify. Link travel time uses the load ratio ``s = h / V`` so the
piecewise-linear grid is well scaled; ``w ~ s^beta``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from .bpr import BprParams, PlaGrid, bpr_time, build_grid, pla_error_bound, pla_fragment, pla_names, pla_point
from .kshortest import RouteSet
from .milp import NAME_RE, LinExpr, MilpModel
from .network import DemandTable, FortificationParams, Network
from .scenarios import ScenarioSet

KINDS = ("baseline", "rn", "ra", "rnra")
MAX_DISRUPTION = 0.999
DEFAULT_PLA_SEGMENTS = 20


@dataclass(frozen=True)
class ObjectiveWeights:
    w1: float = 1 / 3
    w2: float = 1 / 3
    w3: float = 1 / 3
    z_normalizer: float = 1.0
    demand_normalizer: float = 1.0
    cost_normalizer: float = 1.0

    def __post_init__(self):
        if min(self.w1, self.w2, self.w3) < 0:
            raise ValueError("objective weights must be nonnegative")
        if not self.w1 + self.w2 + self.w3 > 0:
            raise ValueError("objective weights must not all be zero")
        for n in ("z_normalizer", "demand_normalizer", "cost_normalizer"):
            if not getattr(self, n) > 0:
                raise ValueError(f"{n} must be positive")

    def replace(self, **kw) -> "ObjectiveWeights":
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d.update(kw)
        return ObjectiveWeights(**d)


@dataclass(frozen=True)
class RiskParams:
    epsilon: float = 0.10
    delta: float = 0.5

    def __post_init__(self):
        if not 0 < self.epsilon <= 1:
            raise ValueError("epsilon must lie in (0, 1]")
        if not 0 <= self.delta <= 1:
            raise ValueError("delta must lie in [0, 1]")


# -- names -----------------------------------------------------------------


def _sfx(*parts) -> str:
    return ".".join(str(p) for p in parts if p is not None)


def n_x(i):
    return f"x({i})"


def n_f(o, d, r, xi=None):
    return f"f({_sfx(o, d, r, xi)})"


def n_u(o, d, xi=None):
    return f"u({_sfx(o, d, xi)})"


def n_h(l, xi=None):
    return f"h({_sfx(l, xi)})"


def n_t(l, xi=None):
    return f"t({_sfx(l, xi)})"


def n_w(l, xi=None):
    return f"w({_sfx(l, xi)})"


def n_rt(o, d, r, xi=None):
    return f"rt({_sfx(o, d, r, xi)})"


def n_z(xi=None):
    return "z" if xi is None else f"z({xi})"


def n_tau(xi):
    return f"tau({xi})"


# -- build context -----------------------------------------------------------


@dataclass
class LinkState:
    """How scenario ``xi`` treats a link: its affected endpoints with their rates."""

    affected: dict[int, float]  # endpoint node -> disruption rate (after clamping)
    closed: dict[int, bool]  # endpoint node -> rate was clamped from ~1


@dataclass
class BuildContext:
    kind: str
    network: Network
    demand: DemandTable
    routes: RouteSet
    scenarios: ScenarioSet | None
    fort: FortificationParams | None
    bpr: BprParams
    weights: ObjectiveWeights
    risk: RiskParams | None
    pla_segments: int
    big_m: float | None
    links: list[int] = field(default_factory=list)
    upper: dict[int, float] = field(default_factory=dict)
    grids: dict[int, PlaGrid] = field(default_factory=dict)
    states: dict[str, dict[int, LinkState]] = field(default_factory=dict)

    @property
    def scenario_ids(self) -> list[str | None]:
        return [None] if self.scenarios is None else self.scenarios.ids

    def probability(self, xi) -> float:
        return 1.0 if xi is None else self.scenarios[xi].probability

    def gamma(self, xi, lid) -> float:
        return self.scenarios[xi].mitigation(lid)

    def effective_capacity(self, xi, lid, fortified) -> float:
        """Capacity of ``lid`` in scenario ``xi`` given the fortified node set."""
        V = self.network.link(lid).capacity
        if xi is None:
            return V
        st = self.states[xi].get(lid)
        if st is None:
            return V
        g = self.gamma(xi, lid)
        caps = []
        for node, rate in st.affected.items():
            caps.append(V * (1 - (1 - g) * rate) if node in fortified else V * (1 - rate))
        return min(caps)

    def is_closed(self, xi, lid, fortified) -> bool:
        if xi is None or lid not in self.states[xi]:
            return False
        st = self.states[xi][lid]
        return any(st.closed[n] and n not in fortified for n in st.affected)


def link_upper_bounds(network: Network, demand: DemandTable, routes: RouteSet) -> dict[int, float]:
    """``U_l = max(V_l, total demand of the OD pairs whose routes use l)``."""
    out = {}
    for lid in sorted(routes.used_links()):
        load = sum(demand.demand(o, d) for o, d in routes.pairs_using(lid))
        out[lid] = max(network.link(lid).capacity, load)
    return out


def _link_states(network: Network, scenarios: ScenarioSet, used: list[int]) -> dict[str, dict[int, LinkState]]:
    out = {}
    for s in scenarios:
        states = {}
        for lid in used:
            link = network.link(lid)
            aff, closed = {}, {}
            for node in (link.tail, link.head):
                if node in s.affected and s.affected[node] > 0:
                    rate = s.affected[node]
                    closed[node] = rate > MAX_DISRUPTION
                    if closed[node]:
                        warnings.warn(
                            f"scenario {s.id}: disruption {rate} at node {node} clamped to {MAX_DISRUPTION}",
                            RuntimeWarning,
                            stacklevel=3,
                        )
                        rate = MAX_DISRUPTION
                    aff[node] = rate
            if aff:
                states[lid] = LinkState(aff, closed)
        out[s.id] = states
    return out


def _check_inputs(network, demand, routes, scenarios=None):
    for o, d in demand.pairs:
        if (o, d) not in routes or not routes[(o, d)]:
            raise ValueError(f"OD pair ({o}, {d}) has no route")
    if scenarios is not None:
        if len(scenarios) == 0:
            raise ValueError("empty scenario set")
        if not scenarios.is_normalized():
            raise ValueError("scenario probabilities must sum to 1")
        for s in scenarios:
            if not NAME_RE.match(s.id) or "." in s.id or "(" in s.id:
                raise ValueError(f"scenario id {s.id!r} cannot be used in variable names")
        scenarios.check(network)


# -- builders ----------------------------------------------------------------


def _scenario_block(m: MilpModel, ctx: BuildContext, xi) -> LinExpr:
    """Second-stage block for one scenario; returns its cost expression."""
    net, dem, routes, bpr, W = ctx.network, ctx.demand, ctx.routes, ctx.bpr, ctx.weights
    alpha, beta = bpr.alpha, bpr.beta
    for o, d in routes.pairs:
        q = dem.demand(o, d)
        terms = {}
        for r in range(1, len(routes[(o, d)]) + 1):
            terms[m.add_variable(n_f(o, d, r, xi)).name] = 1.0
        terms[m.add_variable(n_u(o, d, xi), upper=q).name] = 1.0
        m.add_constraint(f"dem({_sfx(o, d, xi)})", terms, "=", q)
    through: dict[int, list[str]] = {lid: [] for lid in ctx.links}
    for o, d in routes.pairs:
        for r, path in enumerate(routes[(o, d)], start=1):
            for lid in path.links:
                through[lid].append(n_f(o, d, r, xi))
    states = ctx.states.get(xi, {}) if xi is not None else {}
    for lid in ctx.links:
        link = net.link(lid)
        V, T0, U = link.capacity, link.free_flow_time, ctx.upper[lid]
        h = m.add_variable(n_h(lid, xi), upper=U).name
        t = m.add_variable(n_t(lid, xi)).name
        w = m.add_variable(n_w(lid, xi)).name
        terms = {h: 1.0}
        for fname in through[lid]:
            terms[fname] = terms.get(fname, 0.0) - 1.0
        m.add_constraint(f"hdef({_sfx(lid, xi)})", terms, "=", 0.0)
        frag = pla_fragment(ctx.grids[lid], _sfx(lid, xi), h, w, x_scale=V)
        for name in frag.lam:
            m.add_variable(name, upper=1.0)
        for name in frag.y:
            m.add_variable(name, "binary")
        for row in frag.rows:
            m.add_constraint(*row)
        st = states.get(lid)
        if st is None:
            m.add_constraint(f"bpr({_sfx(lid, xi)})", {t: 1.0, w: -alpha * T0}, ">=", T0)
            continue
        g = ctx.gamma(xi, lid)
        for node, rate in st.affected.items():
            v_fort = V * (1 - (1 - g) * rate)
            v_unf = V * (1 - rate)
            c_fort = alpha * T0 * (V / v_fort) ** beta
            c_unf = alpha * T0 * (V / v_unf) ** beta
            M = ctx.big_m if ctx.big_m is not None else alpha * T0 * (U / min(v_fort, v_unf)) ** beta
            x = n_x(node)
            key = _sfx(lid, xi, node)
            # Fortified state binds when x = 1, unfortified when x = 0.
            m.add_constraint(f"bprf({key})", {t: 1.0, w: -c_fort, x: -M}, ">=", T0 - M)
            m.add_constraint(f"bpru({key})", {t: 1.0, w: -c_unf, x: M}, ">=", T0)
            if st.closed[node]:
                m.add_constraint(f"close({key})", {h: 1.0, x: -U}, "<=", 0.0)
    z = m.add_variable(n_z(xi)).name
    for o, d in routes.pairs:
        for r, path in enumerate(routes[(o, d)], start=1):
            rt = m.add_variable(n_rt(o, d, r, xi)).name
            terms = {rt: 1.0}
            for lid in path.links:
                terms[n_t(lid, xi)] = terms.get(n_t(lid, xi), 0.0) - 1.0
            m.add_constraint(f"rtdef({_sfx(o, d, r, xi)})", terms, ">=", 0.0)
            m.add_constraint(f"zdef({_sfx(o, d, r, xi)})", {z: 1.0, rt: -1.0}, ">=", 0.0)
    cost = LinExpr({z: W.w1 / W.z_normalizer})
    for o, d in routes.pairs:
        cost.add(LinExpr({n_u(o, d, xi): W.w2 / W.demand_normalizer}))
    return cost


def _prepare(kind, network, demand, routes, scenarios, fort, bpr, weights, pla_segments, big_m, risk) -> BuildContext:
    _check_inputs(network, demand, routes, scenarios)
    if fort is not None:
        fort.check(network)
    links = sorted(routes.used_links())
    upper = link_upper_bounds(network, demand, routes)
    grids = {lid: build_grid(0.0, upper[lid] / network.link(lid).capacity, pla_segments, bpr.beta) for lid in links}
    ctx = BuildContext(
        kind, network, demand, routes, scenarios, fort, bpr, weights, risk, pla_segments, big_m, links, upper, grids
    )
    if scenarios is not None:
        ctx.states = _link_states(network, scenarios, links)
    return ctx


def build_baseline(
    network: Network,
    demand: DemandTable,
    routes: RouteSet,
    bpr: BprParams = BprParams(),
    weights: ObjectiveWeights | None = None,
    pla_segments: int = DEFAULT_PLA_SEGMENTS,
) -> MilpModel:
    """Undisrupted routing: minimize normalized max route time plus undelivered demand."""
    if weights is None:
        weights = baseline_weights(network, demand, routes)
    ctx = _prepare("baseline", network, demand, routes, None, None, bpr, weights, pla_segments, None, None)
    m = MilpModel("baseline")
    cost = _scenario_block(m, ctx, None)
    m.set_objective(cost)
    m.meta["context"] = ctx
    return m


def _first_stage(m: MilpModel, ctx: BuildContext) -> LinExpr:
    W, fort = ctx.weights, ctx.fort
    for i in ctx.network.nodes:
        m.add_variable(n_x(i), "binary")
    m.add_constraint("budget", {n_x(i): 1.0 for i in ctx.network.nodes}, "<=", fort.budget)
    return LinExpr({n_x(i): W.w3 * fort.cost[i] / W.cost_normalizer for i in ctx.network.nodes})


def _stochastic(kind, network, demand, routes, scenarios, fort, bpr, weights, pla_segments, big_m, risk):
    if kind in ("ra", "rnra") and risk is None:
        raise ValueError(f"{kind} needs risk parameters")
    ctx = _prepare(kind, network, demand, routes, scenarios, fort, bpr, weights, pla_segments, big_m, risk)
    m = MilpModel(kind)
    objective = _first_stage(m, ctx)
    costs = {xi: _scenario_block(m, ctx, xi) for xi in scenarios.ids}
    expected = LinExpr()
    for xi, c in costs.items():
        expected.add(c, ctx.probability(xi))
    if kind == "rn":
        objective.add(expected)
    else:
        delta = 1.0 if kind == "ra" else risk.delta
        v = m.add_variable("v").name
        cvar = LinExpr({v: 1.0})
        for xi, c in costs.items():
            tau = m.add_variable(n_tau(xi)).name
            row = c * -1.0
            row.add(LinExpr({tau: 1.0, v: 1.0}))
            m.add_constraint(f"cvar({xi})", row, ">=", 0.0)
            cvar.add(LinExpr({tau: ctx.probability(xi) / risk.epsilon}))
        if kind == "ra":
            objective.add(cvar)
        else:
            objective.add(expected, 1.0 - delta)
            objective.add(cvar, delta)
    m.set_objective(objective)
    m.meta["context"] = ctx
    return m


def build_rn(network, demand, routes, scenarios, fort, bpr=BprParams(), weights=None,
             pla_segments=DEFAULT_PLA_SEGMENTS, big_m=None) -> MilpModel:
    weights = weights or ObjectiveWeights()
    return _stochastic("rn", network, demand, routes, scenarios, fort, bpr, weights, pla_segments, big_m, None)


def build_ra(network, demand, routes, scenarios, fort, bpr=BprParams(), weights=None,
             pla_segments=DEFAULT_PLA_SEGMENTS, big_m=None, risk=RiskParams()) -> MilpModel:
    weights = weights or ObjectiveWeights()
    return _stochastic("ra", network, demand, routes, scenarios, fort, bpr, weights, pla_segments, big_m, risk)


def build_rnra(network, demand, routes, scenarios, fort, bpr=BprParams(), weights=None,
               pla_segments=DEFAULT_PLA_SEGMENTS, big_m=None, risk=RiskParams()) -> MilpModel:
    weights = weights or ObjectiveWeights()
    return _stochastic("rnra", network, demand, routes, scenarios, fort, bpr, weights, pla_segments, big_m, risk)


def build_model(kind: str, network, demand, routes, scenarios=None, fort=None, bpr=BprParams(), weights=None,
                pla_segments=DEFAULT_PLA_SEGMENTS, big_m=None, risk=None) -> MilpModel:
    if kind == "baseline":
        return build_baseline(network, demand, routes, bpr, weights, pla_segments)
    if kind not in KINDS:
        raise ValueError(f"unknown model kind {kind!r}")
    if kind != "rn" and risk is None:
        risk = RiskParams()
    weights = weights or ObjectiveWeights()
    return _stochastic(kind, network, demand, routes, scenarios, fort, bpr, weights, pla_segments, big_m, risk)


# -- normalizers -------------------------------------------------------------


def max_free_flow_route_time(network: Network, routes: RouteSet) -> float:
    return max(sum(network.link(l).free_flow_time for l in p.links) for _, paths in routes.items() for p in paths)


def baseline_weights(network, demand, routes, w1=1 / 3, w2=1 / 3, w3=1 / 3, fort=None) -> ObjectiveWeights:
    """Weights whose time scale is the longest free-flow route time."""
    costs = max(fort.cost.values()) if fort is not None and fort.cost else 1.0
    return ObjectiveWeights(
        w1, w2, w3,
        z_normalizer=max_free_flow_route_time(network, routes),
        demand_normalizer=demand.total() if demand.total() > 0 else 1.0,
        cost_normalizer=costs if costs > 0 else 1.0,
    )


# -- solutions ---------------------------------------------------------------


@dataclass
class ScenarioResult:
    id: str | None
    probability: float
    flows: dict[tuple[int, int, int], float]
    undelivered: dict[tuple[int, int], float]
    link_flow: dict[int, float]
    link_time: dict[int, float]
    route_time: dict[tuple[int, int, int], float]
    z: float
    residual_capacity: dict[int, float]
    exact_link_time: dict[int, float]
    exact_route_time: dict[tuple[int, int, int], float]
    cost: float

    @property
    def total_undelivered(self) -> float:
        return sum(self.undelivered.values())

    def total_travel_time(self) -> float:
        """Sum of load times exact BPR link time."""
        return sum(self.link_flow[l] * self.exact_link_time[l] for l in self.link_flow)


@dataclass
class Solution:
    status: str
    objective: float
    fortified: set[int]
    scenarios: list[ScenarioResult]
    v: float | None = None
    tau: dict[str, float] = field(default_factory=dict)
    violations: list[str] = field(default_factory=list)
    gap: float | None = None

    def scenario(self, xi) -> ScenarioResult:
        for s in self.scenarios:
            if s.id == xi:
                return s
        raise KeyError(xi)

    def scenario_costs(self) -> list[float]:
        return [s.cost for s in self.scenarios]


def evaluate_objective(model: MilpModel, values) -> float:
    return model.objective.value(values)


def extract_solution(model: MilpModel, raw, status: str = "optimal", tol: float = 1e-6, gap=None) -> Solution:
    """Decode solver values into domain terms and check the solution invariants.

    ``raw`` maps names to values (or is a RawSolution). Tolerances scale with
    the magnitude of the compared quantities.
    """
    if hasattr(raw, "values") and not isinstance(raw, dict):
        status, gap, raw = raw.status, raw.gap, raw.values
    ctx: BuildContext = model.meta["context"]
    missing = [n for n in model.variables if n not in raw]
    if missing:
        raise KeyError(f"no value for {len(missing)} variables, e.g. {missing[0]}")
    net, dem, routes, bpr = ctx.network, ctx.demand, ctx.routes, ctx.bpr
    W = ctx.weights
    violations = []

    def near(a, b, scale=1.0):
        return abs(a - b) <= tol * max(1.0, abs(scale))

    fortified = set()
    if ctx.kind != "baseline":
        fortified = {i for i in net.nodes if raw[n_x(i)] > 0.5}
        if len(fortified) > ctx.fort.budget:
            violations.append(f"{len(fortified)} fortified nodes exceed budget {ctx.fort.budget}")
    results = []
    for xi in ctx.scenario_ids:
        flows, und, hmap, tmap, rtmap, exact_t, exact_rt, resid = {}, {}, {}, {}, {}, {}, {}, {}
        for o, d in routes.pairs:
            q = dem.demand(o, d)
            u = raw[n_u(o, d, xi)]
            und[(o, d)] = u
            if u < -tol * max(1, q) or u > q + tol * max(1, q):
                violations.append(f"u({o},{d}) in {xi}: {u} outside [0, {q}]")
            for r in range(1, len(routes[(o, d)]) + 1):
                flows[(o, d, r)] = raw[n_f(o, d, r, xi)]
        for lid in ctx.links:
            h = raw[n_h(lid, xi)]
            expect = sum(flows[(o, d, r)] for o, d in routes.pairs
                         for r, p in enumerate(routes[(o, d)], start=1) if lid in p.links)
            if not near(h, expect, expect):
                violations.append(f"h({lid}) in {xi}: {h} differs from route flow sum {expect}")
            hmap[lid] = h
            tmap[lid] = raw[n_t(lid, xi)]
            cap = ctx.effective_capacity(xi, lid, fortified)
            resid[lid] = cap
            link = net.link(lid)
            exact_t[lid] = bpr_time(link.free_flow_time, bpr, max(h, 0.0), cap)
            if h > tol and tmap[lid] < exact_t[lid] - tol * max(1.0, exact_t[lid]):
                violations.append(f"t({lid}) in {xi}: {tmap[lid]} below BPR time {exact_t[lid]}")
        z = raw[n_z(xi)]
        for o, d in routes.pairs:
            for r, p in enumerate(routes[(o, d)], start=1):
                rt = raw[n_rt(o, d, r, xi)]
                rtmap[(o, d, r)] = rt
                exact_rt[(o, d, r)] = sum(exact_t[l] for l in p.links)
                if z < rt - tol * max(1.0, abs(rt)):
                    violations.append(f"z in {xi}: {z} below route time {rt} of ({o},{d},{r})")
        for lid in net.links:
            if lid.id not in resid:
                resid[lid.id] = ctx.effective_capacity(xi, lid.id, fortified)
        cost = W.w1 * z / W.z_normalizer + W.w2 * sum(und.values()) / W.demand_normalizer
        results.append(
            ScenarioResult(xi, ctx.probability(xi), flows, und, hmap, tmap, rtmap, z, resid, exact_t, exact_rt, cost)
        )
    worst, where = model.max_violation(raw)
    if worst > tol * 10 and where is not None:
        scale = max(1.0, max(abs(v) for v in raw.values()))
        if worst > tol * scale:
            violations.append(f"row {where} violated by {worst}")
    sol = Solution(status, evaluate_objective(model, raw), fortified, results, gap=gap, violations=violations)
    if "v" in model.variables:
        sol.v = raw["v"]
        sol.tau = {xi: raw[n_tau(xi)] for xi in ctx.scenarios.ids}
    return sol


# -- feasible starting points --------------------------------------------------


def _lower_rows(model: MilpModel) -> dict[str, list]:
    """Rows ``var - (...) >= rhs`` indexed by ``var`` (coefficient +1 on it)."""
    out: dict[str, list] = {}
    for c in model.constraints:
        if c.sense != ">=":
            continue
        for name, coef in c.expr.terms.items():
            if coef == 1.0 and name[:2] in ("t(", "rt", "z", "z(", "ta", "v"):
                out.setdefault(name, []).append(c)
    return out


def _raise_to(values, name, rows):
    """Smallest value of ``name`` satisfying its lower-bounding rows, all else fixed."""
    need = 0.0
    for c in rows:
        rest = sum(k * values[v] for v, k in c.expr.terms.items() if v != name)
        need = max(need, c.rhs - rest)
    values[name] = need


def feasible_point(model: MilpModel, fortified=(), flows=None) -> dict[str, float]:
    """A feasible assignment for ``model`` with the given first stage and route flows.

    ``flows`` maps scenario id (``None`` for the baseline) to
    ``{(o, d, r): flow}``; missing entries are zero. Flows on links that are
    shut in a scenario are dropped. Times take the smallest values the rows
    allow, so the objective is the true cost of this plan under the PLA.
    """
    ctx: BuildContext = model.meta["context"]
    net, dem, routes = ctx.network, ctx.demand, ctx.routes
    flows = flows or {}
    fortified = set(fortified)
    vals = {name: 0.0 for name in model.variables}
    if ctx.kind != "baseline":
        for i in fortified:
            vals[n_x(i)] = 1.0
    lower = _lower_rows(model)
    costs = {}
    for xi in ctx.scenario_ids:
        shut = {lid for lid in ctx.links if ctx.is_closed(xi, lid, fortified)}
        given = flows.get(xi, {})
        for o, d in routes.pairs:
            q = dem.demand(o, d)
            sent = 0.0
            for r, path in enumerate(routes[(o, d)], start=1):
                f = max(0.0, given.get((o, d, r), 0.0))
                f = min(f, q - sent)
                if shut.intersection(path.links):
                    f = 0.0
                vals[n_f(o, d, r, xi)] = f
                sent += f
            vals[n_u(o, d, xi)] = q - sent
        for lid in ctx.links:
            h = sum(vals[n_f(o, d, r, xi)] for o, d in routes.pairs
                    for r, p in enumerate(routes[(o, d)], start=1) if lid in p.links)
            h = min(h, ctx.upper[lid])
            vals[n_h(lid, xi)] = h
            grid = ctx.grids[lid]
            k, lam, w = pla_point(grid, h / net.link(lid).capacity)
            lam_names, y_names = pla_names(_sfx(lid, xi), grid.segments)
            for idx, v in lam.items():
                vals[lam_names[idx]] = v
            vals[y_names[k - 1]] = 1.0
            vals[n_w(lid, xi)] = sum(lam[idx] * grid.values[idx] for idx in lam)
            _raise_to(vals, n_t(lid, xi), lower.get(n_t(lid, xi), []))
        for o, d in routes.pairs:
            for r in range(1, len(routes[(o, d)]) + 1):
                name = n_rt(o, d, r, xi)
                _raise_to(vals, name, lower.get(name, []))
        _raise_to(vals, n_z(xi), lower.get(n_z(xi), []))
        W = ctx.weights
        costs[xi] = W.w1 * vals[n_z(xi)] / W.z_normalizer + W.w2 * sum(
            vals[n_u(o, d, xi)] for o, d in routes.pairs) / W.demand_normalizer
    if "v" in model.variables:
        probs = [ctx.probability(xi) for xi in ctx.scenario_ids]
        ordered = sorted(zip([costs[xi] for xi in ctx.scenario_ids], probs), reverse=True)
        # Value-at-risk: the cost where the upper tail first reaches epsilon.
        acc, var = 0.0, ordered[-1][0]
        for c, p in ordered:
            acc += p
            if acc >= ctx.risk.epsilon - 1e-12:
                var = c
                break
        vals["v"] = var
        for xi in ctx.scenario_ids:
            vals[n_tau(xi)] = max(0.0, costs[xi] - var)
    return vals


def warm_start(model: MilpModel, base_flows=None, fractions=(0.0, 0.25, 0.5, 0.75, 1.0)) -> dict[str, float]:
    """Feasible start with nothing fortified.

    Each scenario independently sends the fraction of ``base_flows`` (route
    flows keyed ``(o, d, r)``) that gives it the lowest cost.
    """
    ctx: BuildContext = model.meta["context"]
    base_flows = base_flows or {}
    if not base_flows:
        fractions = (0.0,)
    best: dict = {}
    for frac in fractions:
        scaled = {key: frac * f for key, f in base_flows.items()}
        vals = feasible_point(model, (), {xi: scaled for xi in ctx.scenario_ids})
        W = ctx.weights
        for xi in ctx.scenario_ids:
            cost = W.w1 * vals[n_z(xi)] / W.z_normalizer + W.w2 * sum(
                vals[n_u(o, d, xi)] for o, d in ctx.routes.pairs) / W.demand_normalizer
            if xi not in best or cost < best[xi][0] - 1e-12:
                best[xi] = (cost, scaled)
    return feasible_point(model, (), {xi: flows for xi, (_, flows) in best.items()})


def fixed_relaxation(model: MilpModel, fortified=()) -> MilpModel:
    """Copy of ``model`` with the first stage fixed and every other binary relaxed.

    BPR times are convex and minimized, so for a fixed plan the relaxed
    segment choice loses nothing: its optimal route flows are optimal for the
    original model once ``feasible_point`` restores adjacent breakpoints.
    """
    ctx: BuildContext = model.meta["context"]
    out = MilpModel(f"{model.name}_fixed", meta=dict(model.meta))
    fixed = {n_x(i): float(i in set(fortified)) for i in ctx.network.nodes} if ctx.kind != "baseline" else {}
    for name, var in model.variables.items():
        if name in fixed:
            out.add_variable(name, "continuous", fixed[name], fixed[name])
        else:
            out.add_variable(name, "continuous", var.lower, 1.0 if var.kind == "binary" else var.upper)
    for c in model.constraints:
        out.add_constraint(c.name, c.expr, c.sense, c.rhs)
    out.set_objective(model.objective)
    return out


def route_flows(model: MilpModel, values) -> dict:
    """Route flows per scenario id, keyed ``(o, d, r)``, read from solver values."""
    ctx: BuildContext = model.meta["context"]
    out = {}
    for xi in ctx.scenario_ids:
        out[xi] = {
            (o, d, r): values.get(n_f(o, d, r, xi), 0.0)
            for o, d in ctx.routes.pairs
            for r in range(1, len(ctx.routes[(o, d)]) + 1)
        }
    return out


def pla_slack(ctx: BuildContext) -> float:
    """Largest objective increase the PLA overestimate can cause."""
    W, net, bpr = ctx.weights, ctx.network, ctx.bpr
    err = {lid: pla_error_bound(ctx.grids[lid]) for lid in ctx.links}
    worst = 0.0
    for xi in ctx.scenario_ids:
        coef = {}
        for lid in ctx.links:
            link = net.link(lid)
            V = link.capacity
            vmin = V
            if xi is not None and lid in ctx.states[xi]:
                st = ctx.states[xi][lid]
                vmin = min(V * (1 - rate) for rate in st.affected.values())
            coef[lid] = bpr.alpha * link.free_flow_time * (V / vmin) ** bpr.beta * err[lid]
        for _, paths in ctx.routes.items():
            for p in paths:
                worst = max(worst, sum(coef[l] for l in p.links))
    return W.w1 * worst / W.z_normalizer


def manifest(model: MilpModel, inputs: dict | None = None) -> dict:
    ctx: BuildContext = model.meta["context"]
    out = {
        "kind": ctx.kind,
        "stats": model.stats(),
        "weights": {k: getattr(ctx.weights, k) for k in ctx.weights.__dataclass_fields__},
        "bpr": {"alpha": ctx.bpr.alpha, "beta": ctx.bpr.beta},
        "pla_segments": ctx.pla_segments,
        "big_m": ctx.big_m,
        "routes_per_pair": {f"({o},{d})": len(p) for (o, d), p in ctx.routes.items()},
        "demand_scale": ctx.demand.scale_multiplier,
    }
    if ctx.risk is not None:
        out["risk"] = {"epsilon": ctx.risk.epsilon, "delta": ctx.risk.delta}
    if ctx.fort is not None:
        out["budget"] = ctx.fort.budget
    if ctx.scenarios is not None:
        out["scenarios"] = ctx.scenarios.ids
    if inputs:
        out["inputs"] = inputs
    return out
