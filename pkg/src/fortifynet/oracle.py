"""Brute-force reference solver for tiny instances.

Enumerates every fortification set within budget and every route-flow
assignment on a grid, evaluates the exact BPR times (no linearization) and
combines scenario costs with the exact expectation / CVaR. Used only to
check the MILP builders.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

MAX_NODES = 4
MAX_LINKS = 6
MAX_ROUTES = 3
MAX_SCENARIOS = 2
MAX_COMBOS = 10_000


def cvar_sorted(costs, probs, epsilon: float) -> float:
    """Expected cost in the worst ``epsilon`` tail, by sorting outcomes."""
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    pairs = sorted(zip(costs, probs), key=lambda cp: cp[0], reverse=True)
    remaining = epsilon
    total = 0.0
    for c, p in pairs:
        take = min(p, remaining)
        total += take * c
        remaining -= take
        if remaining <= 1e-15:
            break
    return total / epsilon


def _flow_grid(q: float, n_routes: int, step: float) -> np.ndarray:
    top = int(math.floor(q / step + 1e-9))
    rows = [c for c in itertools.product(range(top + 1), repeat=n_routes) if sum(c) <= top]
    return np.array(rows, dtype=float) * step


def combo_count(demand, routes, step: float) -> int:
    n = 1
    for o, d in routes.pairs:
        top = int(math.floor(demand.demand(o, d) / step + 1e-9))
        r = len(routes[(o, d)])
        n *= math.comb(top + r, r)
    return n


def grid_slack(demand, routes, weights, step: float) -> float:
    """Objective error from restricting route flows to multiples of ``step``."""
    n = sum(len(routes[p]) for p in routes.pairs)
    return weights.w2 * n * step / weights.demand_normalizer


def _capacity(link, scenario, fortified, clamp=0.999):
    """Effective capacity, or ``None`` when the link is shut."""
    if scenario is None:
        return link.capacity
    caps = []
    for node in (link.tail, link.head):
        rate = scenario.affected.get(node, 0.0)
        if rate <= 0:
            continue
        if node in fortified:
            g = scenario.mitigation(link.id)
            caps.append(link.capacity * (1 - (1 - g) * min(rate, clamp)))
        elif rate > clamp:
            return None
        else:
            caps.append(link.capacity * (1 - rate))
    return min(caps) if caps else link.capacity


def oracle_solve(network, demand, routes, scenarios, fort, bpr, weights, risk=None, flow_grid=1.0, kind=None):
    """Exhaustive optimum ``(objective, fortified)``.

    ``kind`` defaults to ``baseline`` without scenarios, ``rn`` without risk
    parameters and ``rnra`` otherwise (``ra`` is ``rnra`` with delta = 1).
    """
    if kind is None:
        kind = "baseline" if scenarios is None else ("rn" if risk is None else "rnra")
    if len(network) > MAX_NODES or len(network.links) > MAX_LINKS:
        raise ValueError("instance too large for the oracle")
    if any(len(routes[p]) > MAX_ROUTES for p in routes.pairs):
        raise ValueError("too many routes per pair for the oracle")
    if scenarios is not None and len(scenarios) > MAX_SCENARIOS:
        raise ValueError("too many scenarios for the oracle")
    if combo_count(demand, routes, flow_grid) > MAX_COMBOS:
        raise ValueError("flow grid too fine: combination cap exceeded")

    pairs = routes.pairs
    route_links = [p.links for pair in pairs for p in routes[pair]]
    links = sorted({l for rl in route_links for l in rl})
    col = {l: k for k, l in enumerate(links)}
    B = np.zeros((len(route_links), len(links)))
    for r, rl in enumerate(route_links):
        for l in rl:
            B[r, col[l]] += 1.0
    # Cartesian product of per-pair flow grids.
    blocks = [_flow_grid(demand.demand(o, d), len(routes[(o, d)]), flow_grid) for o, d in pairs]
    F = blocks[0]
    for blk in blocks[1:]:
        F = np.hstack([np.repeat(F, len(blk), axis=0), np.tile(blk, (len(F), 1))])
    H = F @ B
    undelivered = demand.total() - F.sum(axis=1)
    T0 = np.array([network.link(l).free_flow_time for l in links])

    def scenario_cost(scenario, fortified):
        caps = [_capacity(network.link(l), scenario, fortified) for l in links]
        ok = np.ones(len(F), dtype=bool)
        cap = np.empty(len(links))
        for k, c in enumerate(caps):
            if c is None:
                ok &= H[:, k] <= 1e-12
                cap[k] = 1.0
            else:
                cap[k] = c
        t = T0 * (1 + bpr.alpha * (H / cap) ** bpr.beta)
        z = (t @ B.T).max(axis=1)
        cost = weights.w1 * z / weights.z_normalizer + weights.w2 * undelivered / weights.demand_normalizer
        return float(cost[ok].min())

    if kind == "baseline":
        return scenario_cost(None, frozenset()), frozenset()

    probs = [s.probability for s in scenarios]
    best, best_x = math.inf, frozenset()
    nodes = list(network.nodes)
    for k in range(fort.budget + 1):
        for combo in itertools.combinations(nodes, k):
            x = frozenset(combo)
            first = weights.w3 * sum(fort.cost[i] for i in x) / weights.cost_normalizer
            costs = [scenario_cost(s, x) for s in scenarios]
            mean = sum(p * c for p, c in zip(probs, costs))
            if kind == "rn":
                val = first + mean
            elif kind == "ra":
                val = first + cvar_sorted(costs, probs, risk.epsilon)
            else:
                d = risk.delta
                val = first + (1 - d) * mean + d * cvar_sorted(costs, probs, risk.epsilon)
            if val < best - 1e-12:
                best, best_x = val, x
    return best, best_x
