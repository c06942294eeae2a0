"""Command-line shim around HiGHS that follows the solver subprocess contract.

    python -m fortifynet.highs_runner MODEL.lp SOLUTION [--time-limit S] [--gap G] [--format pairs|xml]
        [--threads N] [--start START]

START is a MIP start in the ``pairs`` layout (``name value`` lines).

Exit code 0 whenever a solution file was written, 1 otherwise.
"""

from __future__ import annotations

import argparse
import math
import sys

import highspy

from .solver import RawSolution, parse_pairs, write_pairs, write_xml


def _set_start(h, path: str) -> None:
    with open(path) as fh:
        start = parse_pairs(fh.read()).values
    lp = h.getLp()
    sol = highspy.HighsSolution()
    sol.col_value = [start.get(name, 0.0) for name in lp.col_names_]
    sol.value_valid = True
    h.setSolution(sol)


def run(model_path: str, time_limit: float, gap: float, threads: int | None = None,
        start: str | None = None) -> RawSolution:
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("time_limit", float(time_limit))
    h.setOptionValue("mip_rel_gap", float(gap))
    if threads:
        h.setOptionValue("threads", int(threads))
    if h.readModel(model_path) != highspy.HighsStatus.kOk:
        return RawSolution("error", log=f"HiGHS could not read {model_path}")
    if start:
        _set_start(h, start)
    h.run()
    ms = h.getModelStatus()
    S = highspy.HighsModelStatus
    info = h.getInfo()
    has_primal = info.primal_solution_status == 2
    if ms == S.kOptimal:
        status = "optimal"
    elif ms == S.kInfeasible:
        status = "infeasible"
    elif ms in (S.kUnbounded, S.kUnboundedOrInfeasible):
        status = "unbounded" if ms == S.kUnbounded else "infeasible"
    elif has_primal:
        status = "feasible"
    else:
        return RawSolution("error", log=h.modelStatusToString(ms))
    if status not in ("optimal", "feasible"):
        return RawSolution(status)
    lp = h.getLp()
    values = dict(zip(lp.col_names_, h.getSolution().col_value))
    gap_val = info.mip_gap if h.getLp().integrality_ else 0.0
    if not math.isfinite(gap_val):
        gap_val = None
    return RawSolution(status, info.objective_function_value, values, gap_val)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="highs_runner")
    ap.add_argument("model")
    ap.add_argument("solution")
    ap.add_argument("--time-limit", type=float, default=600.0)
    ap.add_argument("--gap", type=float, default=1e-6)
    ap.add_argument("--format", choices=("pairs", "xml"), default="pairs")
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--start", default=None)
    args = ap.parse_args(argv)
    sol = run(args.model, args.time_limit, args.gap, args.threads, args.start)
    if sol.status == "error":
        print(sol.log, file=sys.stderr)
        return 1
    text = write_pairs(sol) if args.format == "pairs" else write_xml(sol)
    with open(args.solution, "w") as fh:
        fh.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
