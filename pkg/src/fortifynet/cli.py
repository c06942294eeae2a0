"""``fortifynet`` command line: measures, routes, scenarios, solve, sweep.

Exit codes: 0 success, 2 infeasible, 3 solver error, 4 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .bpr import BprParams
from .kshortest import build_route_sets, route_weights
from .measures import MeasureContext, MeasureKind, compute_all, ranking_csv, to_json, to_long_csv, to_matrix_csv
from .models import RiskParams, manifest
from .network import (
    DEFAULT_DEMAND_SCALE,
    FortificationParams,
    TntpParseError,
    _data_text,
    load_demand,
    parse_tntp,
)
from .pipeline import (
    Problem,
    SolveFailed,
    mean_relative_undelivered,
    od_max_table,
    route_flow_table,
    scenario_rows,
    scenario_table,
    sha256_text,
    solve_kind,
    stochastic_weights,
    undelivered_table,
    _csv,
)
from .scenarios import ScenarioSet, builtin_catalog, generate_from_measures
from .solver import SolverConfig, write_lp

EXIT_OK, EXIT_INFEASIBLE, EXIT_SOLVER, EXIT_INPUT = 0, 2, 3, 4
DEFAULT_RATES = (0.7, 0.68, 0.66, 0.64, 0.62, 0.6, 0.58, 0.56)


class InputError(Exception):
    pass


def _read(path: str | None, builtin: str) -> tuple[str, str]:
    """Text of ``path`` (or of the bundled Sioux Falls file) and a label for it."""
    if path is None:
        return _data_text(builtin), f"builtin:{builtin}"
    try:
        return Path(path).read_text(), path
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc


class Inputs:
    def __init__(self, args):
        self.digests = {}
        net_text, label = _read(args.net, "SiouxFalls_net.tntp")
        self.digests[label] = sha256_text(net_text)
        try:
            self.network = parse_tntp(net_text)
        except (TntpParseError, ValueError) as exc:
            raise InputError(f"{label}: {exc}") from exc
        dem_text, label = _read(args.demand, "SiouxFalls_demand.csv")
        self.digests[label] = sha256_text(dem_text)
        try:
            self.demand = load_demand(dem_text, args.demand_scale)
        except ValueError as exc:
            raise InputError(f"{label}: {exc}") from exc
        for o, d in self.demand.pairs:
            if o not in self.network or d not in self.network:
                raise InputError(f"demand pair ({o}, {d}) uses an unknown node")
        self.args = args
        self._routes = None

    def routes(self):
        if self._routes is None:
            w = route_weights(self.network, self.args.route_weights)
            try:
                self._routes = build_route_sets(self.network, self.demand, w, self.args.k)
            except ValueError as exc:
                raise InputError(str(exc)) from exc
        return self._routes

    def scenarios(self) -> ScenarioSet:
        src = getattr(self.args, "scenarios", "builtin") or "builtin"
        gamma = getattr(self.args, "gamma", 0.5)
        if src == "builtin":
            sc = builtin_catalog(gamma)
            self.digests["builtin:catalog"] = sha256_text(sc.to_json())
            return sc
        if src == "generate":
            ctx = MeasureContext(self.network, self.demand, self.routes())
            vecs = list(compute_all(ctx).values())
            top = min(len(DEFAULT_RATES), len(self.network))
            return generate_from_measures(vecs, top, DEFAULT_RATES, gamma=gamma)
        text, label = _read(src, "")
        self.digests[label] = sha256_text(text)
        try:
            sc = ScenarioSet.from_json(text)
            sc.check(self.network)
        except (ValueError, KeyError, TypeError) as exc:
            raise InputError(f"{label}: {exc}") from exc
        from .scenarios import normalize_probabilities

        return normalize_probabilities(sc)

    def fortification(self) -> FortificationParams:
        path = getattr(self.args, "fortification", None)
        if path:
            text, label = _read(path, "")
            self.digests[label] = sha256_text(text)
            fort = FortificationParams.from_json(text)
        else:
            fort = FortificationParams.uniform(self.network, 4)
        if self.args.nf is not None:
            fort = fort.with_budget(self.args.nf)
        try:
            fort.check(self.network)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        return fort


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, text: str) -> None:
    path.write_text(text)


def _solver_config(args) -> SolverConfig:
    kw = {"time_limit": args.time_limit, "gap_tolerance": args.gap, "solution_format": args.solver_format}
    if args.solver:
        kw["executable"] = args.solver
    if args.keep_artifacts:
        kw["keep_artifacts"] = str(Path(args.out) / "artifacts")
    return SolverConfig(**kw)


def _problem(inp: Inputs, args, with_scenarios=True) -> Problem:
    problem = Problem(
        inp.network,
        inp.demand,
        inp.routes(),
        inp.scenarios() if with_scenarios else None,
        inp.fortification(),
        BprParams(),
        (args.w1, args.w2, args.w3),
        args.pla_n,
        args.big_m,
        args.z_norm,
    )
    problem.use_warm_start = not args.no_warm_start
    return problem


# -- commands ------------------------------------------------------------------


def cmd_measures(args) -> int:
    inp = Inputs(args)
    kinds = list(MeasureKind)
    if args.measures:
        wanted = {s.strip().lower() for s in args.measures.split(",")}
        kinds = [k for k in MeasureKind if k.value.lower() in wanted or k.value.lower().replace("centrality", "") in wanted]
        if not kinds:
            raise InputError(f"no measure matches {args.measures!r}")
    ctx = MeasureContext(inp.network, inp.demand, inp.routes())
    vecs = compute_all(ctx, kinds)
    out = _out(args)
    _write(out / "measures.csv", to_matrix_csv(vecs))
    _write(out / "measures_long.csv", to_long_csv(vecs))
    _write(out / "measures.json", to_json(vecs))
    _write(out / "rankings.csv", ranking_csv(vecs, args.top))
    return EXIT_OK


def cmd_routes(args) -> int:
    inp = Inputs(args)
    routes = inp.routes()
    out = _out(args)
    _write(out / "routes.json", routes.to_json())
    rows = []
    for (o, d), paths in routes.items():
        for r, p in enumerate(paths, start=1):
            rows.append((o, d, r, "-".join(map(str, p.nodes)), p.cost))
    _write(out / "routes.csv", _csv(["origin", "destination", "route", "nodes", "cost"], rows))
    return EXIT_OK


def cmd_scenarios(args) -> int:
    inp = Inputs(args)
    sc = inp.scenarios()
    out = _out(args)
    _write(out / "scenarios.json", sc.to_json())
    rows = [
        (s.id, s.measure.value if s.measure else "", s.probability, s.risk,
         " ".join(f"{n}:{r:g}" for n, r in s.affected.items()), s.notes)
        for s in sc
    ]
    _write(out / "scenarios.csv", _csv(["scenario", "measure", "probability", "risk", "affected", "notes"], rows))
    return EXIT_OK


def _report(run, inp: Inputs, args, extra=None) -> dict:
    sol = run.solution
    rep = {
        "model": run.kind,
        "status": run.raw.status,
        "objective": None if sol is None else sol.objective,
        "solver_objective": run.raw.objective if run.raw.status in ("optimal", "feasible") else None,
        "gap": run.raw.gap,
        "fortified": [] if sol is None else sorted(sol.fortified),
        "weights": {k: getattr(run.weights, k) for k in run.weights.__dataclass_fields__},
        "inputs": dict(sorted(inp.digests.items())),
        "demand_scale": inp.demand.scale_multiplier,
        "k": args.k,
        "route_weights": args.route_weights,
        "pla_segments": args.pla_n,
    }
    if run.risk is not None:
        rep["risk"] = {"epsilon": run.risk.epsilon, "delta": run.risk.delta}
    if sol is not None:
        total = inp.demand.total()
        rep["scenarios"] = [
            dict(zip(["scenario", "probability", "relative_undelivered", "total_travel_time", "max_travel_time"], r))
            for r in scenario_rows(sol, total)
        ]
        rep["mean_relative_undelivered"] = mean_relative_undelivered(sol, total)
        rep["violations"] = sol.violations
    if extra:
        rep.update(extra)
    rep["metadata"] = {"created": time.strftime("%Y-%m-%dT%H:%M:%S"), "version": __version__}
    return rep


def _exit_for(status: str) -> int:
    if status in ("optimal", "feasible"):
        return EXIT_OK
    if status in ("infeasible", "unbounded"):
        return EXIT_INFEASIBLE
    return EXIT_SOLVER


def _write_run(out: Path, run, inp: Inputs, args, extra=None) -> None:
    lp = write_lp(run.model)
    _write(out / "model.lp", lp)
    man = manifest(run.model, dict(sorted(inp.digests.items())))
    man["lp_sha256"] = sha256_text(lp)
    _write(out / "model.manifest.json", json.dumps(man, indent=1, sort_keys=True))
    rep = _report(run, inp, args, extra)
    _write(out / "report.json", json.dumps(rep, indent=1))
    sol = run.solution
    if sol is None:
        return
    total = inp.demand.total()
    routes = inp.routes()
    _write(out / "scenario_table.csv", scenario_table(sol, total))
    _write(out / "fortified.csv", _csv(["node"], [(n,) for n in sorted(sol.fortified)]))
    _write(out / "route_flows.csv", route_flow_table(sol, routes))
    _write(out / "undelivered.csv", undelivered_table(sol, inp.demand))
    _write(out / "od_max_time.csv", od_max_table(sol, routes))
    rows = scenario_rows(sol, total)
    _write(out / "plot_undelivered.csv", _csv(["scenario", "relative_undelivered"], [(r[0], r[2]) for r in rows]))
    _write(out / "plot_travel_time.csv", _csv(["scenario", "total_travel_time"], [(r[0], r[3]) for r in rows]))


def _risk(args, delta=None) -> RiskParams:
    return RiskParams(args.epsilon, args.delta if delta is None else delta)


def cmd_solve(args) -> int:
    inp = Inputs(args)
    problem = _problem(inp, args, with_scenarios=args.model != "baseline")
    config = _solver_config(args)
    risk = _risk(args) if args.model in ("ra", "rnra") else None
    try:
        run = solve_kind(args.model, problem, config, risk)
    except SolveFailed as exc:
        print(f"baseline calibration failed: {exc}", file=sys.stderr)
        return _exit_for(exc.raw.status)
    _write_run(_out(args), run, inp, args)
    if run.raw.status not in ("optimal", "feasible"):
        print(f"solver status: {run.raw.status}", file=sys.stderr)
        print(run.raw.log.strip()[:2000], file=sys.stderr)
    else:
        print(f"{run.kind}: {run.raw.status} objective {run.solution.objective:.10g} "
              f"fortified {sorted(run.solution.fortified)}")
    return _exit_for(run.raw.status)


def cmd_sweep(args) -> int:
    inp = Inputs(args)
    if args.model != "rnra":
        raise InputError("sweep needs --model rnra")
    deltas = [float(x) for x in args.deltas.split(",") if x.strip()]
    problem = _problem(inp, args)
    config = _solver_config(args)
    try:
        weights = stochastic_weights(problem, config)
    except SolveFailed as exc:
        print(f"baseline calibration failed: {exc}", file=sys.stderr)
        return _exit_for(exc.raw.status)
    jobs = [("rnra", d) for d in deltas]
    if not args.no_endpoints:
        jobs = [("rn", None), ("ra", None)] + jobs

    def work(job):
        kind, d = job
        risk = None if kind == "rn" else _risk(args, 1.0 if kind == "ra" else d)
        try:
            return job, solve_kind(kind, problem, config, risk, weights)
        except Exception as exc:  # recorded per job; the sweep goes on
            return job, exc

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        results = list(pool.map(work, jobs))
    out = _out(args)
    total = inp.demand.total()
    rows, summary, worst = [], [], EXIT_OK
    for (kind, d), run in results:
        label = kind if d is None else f"rnra({d:g})"
        if isinstance(run, Exception):
            summary.append((label, kind, d, "error", None, None, "", str(run)))
            worst = max(worst, EXIT_SOLVER)
            continue
        status = run.raw.status
        worst = max(worst, _exit_for(status))
        sub = out / (kind if d is None else f"rnra_{d:g}")
        sub.mkdir(exist_ok=True)
        _write_run(sub, run, inp, args, {"delta": d})
        if run.solution is None:
            summary.append((label, kind, d, status, None, None, "", ""))
            continue
        for r in scenario_rows(run.solution, total):
            rows.append((label, d, r[0], r[1], r[2], r[3], r[4]))
        summary.append((
            label, kind, d, status, run.solution.objective,
            mean_relative_undelivered(run.solution, total),
            " ".join(map(str, sorted(run.solution.fortified))), "",
        ))
    _write(out / "sweep.csv", _csv(
        ["strategy", "delta", "scenario", "probability", "relative_undelivered", "total_travel_time",
         "max_travel_time"], rows))
    _write(out / "sweep_summary.csv", _csv(
        ["strategy", "kind", "delta", "status", "objective", "mean_relative_undelivered", "fortified", "error"],
        summary))
    return worst


# -- argument parsing -----------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--net", help="TNTP network file (default: bundled Sioux Falls)")
    p.add_argument("--demand", help="demand CSV origin,destination,demand (default: bundled Sioux Falls)")
    p.add_argument("--demand-scale", type=float, default=DEFAULT_DEMAND_SCALE)
    p.add_argument("--k", type=int, default=10, help="routes per OD pair")
    p.add_argument("--route-weights", choices=("hops", "free-flow"), default="hops")
    p.add_argument("--out", default="out")


def _model_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenarios", default="builtin", help="builtin | generate | path to scenario JSON")
    p.add_argument("--gamma", type=float, default=0.5, help="mitigation rate for generated/builtin scenarios")
    p.add_argument("--fortification", help="JSON with per-node costs and budget")
    p.add_argument("--model", choices=("baseline", "rn", "ra", "rnra"), default="rn")
    p.add_argument("--pla-n", type=int, default=20)
    p.add_argument("--nf", type=int, default=None, help="fortification budget")
    p.add_argument("--w1", type=float, default=1 / 3)
    p.add_argument("--w2", type=float, default=1 / 3)
    p.add_argument("--w3", type=float, default=1 / 3)
    p.add_argument("--z-norm", type=float, default=None, help="time normalizer (default: baseline optimum)")
    p.add_argument("--epsilon", type=float, default=0.10)
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--big-m", type=float, default=None)
    p.add_argument("--solver", default=None, help="solver command (default: $FORTIFYNET_SOLVER or bundled HiGHS shim)")
    p.add_argument("--solver-format", choices=("pairs", "xml"), default="pairs")
    p.add_argument("--time-limit", type=float, default=600.0)
    p.add_argument("--gap", type=float, default=1e-4)
    p.add_argument("--keep-artifacts", action="store_true")
    p.add_argument("--no-warm-start", action="store_true", help="do not pass a feasible start to the solver")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fortifynet", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("measures", help="node vulnerability measures")
    _common(p)
    p.add_argument("--measures", help="comma-separated measure names (default: all)")
    p.add_argument("--top", type=int, default=8)
    p.set_defaults(func=cmd_measures)
    p = sub.add_parser("routes", help="K loopless routes per OD pair")
    _common(p)
    p.set_defaults(func=cmd_routes)
    p = sub.add_parser("scenarios", help="write the scenario set")
    _common(p)
    p.add_argument("--scenarios", default="builtin")
    p.add_argument("--gamma", type=float, default=0.5)
    p.set_defaults(func=cmd_scenarios)
    p = sub.add_parser("solve", help="build, solve and report one model")
    _common(p)
    _model_opts(p)
    p.set_defaults(func=cmd_solve)
    p = sub.add_parser("sweep", help="solve the hybrid model for several delta values")
    _common(p)
    _model_opts(p)
    p.set_defaults(model="rnra")
    p.add_argument("--deltas", default="0.3,0.6,0.9")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--no-endpoints", action="store_true", help="skip the rn and ra reference solves")
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, KeyError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
