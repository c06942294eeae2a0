"""LP-file serialization and the external-solver subprocess bridge."""

from __future__ import annotations

import math
import os
import shlex
import shutil
import subprocess
import sys
import tempfile
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path

from .milp import NAME_RE, LinExpr, MilpModel, ModelError, Var

STATUSES = ("optimal", "feasible", "infeasible", "unbounded", "error")
DIALECTS = ("pairs", "xml")

_LINE_WIDTH = 100


def _num(x: float) -> str:
    return format(x, ".17g")


def _terms(expr: LinExpr) -> list[str]:
    out = []
    for name, c in expr.terms.items():
        sign = "-" if c < 0 else "+"
        out.append(f"{sign} {_num(abs(c))} {name}")
    return out


def _wrap(head: str, pieces: list[str]) -> list[str]:
    lines, cur = [], head
    for p in pieces:
        if len(cur) + 1 + len(p) > _LINE_WIDTH and cur.strip():
            lines.append(cur)
            cur = "  " + p
        else:
            cur = f"{cur} {p}" if cur else p
    lines.append(cur)
    return lines


def _check_name(name: str) -> None:
    if not NAME_RE.match(name):
        raise ModelError(f"name {name!r} is not legal in LP files")


def write_lp(model: MilpModel) -> str:
    """CPLEX LP text. Identical models give identical bytes.

    An objective constant is not written; it is added back after solving.
    """
    first = next(iter(model.variables), None)
    lines = [f"\\ {model.name}", "Minimize"]
    obj_terms = _terms(model.objective)
    if not obj_terms and first is not None:
        obj_terms = [f"+ 0 {first}"]
    lines += _wrap(" obj:", obj_terms)
    lines.append("Subject To")
    for c in model.constraints:
        _check_name(c.name)
        pieces = _terms(c.expr)
        if not pieces:
            if first is None:
                raise ModelError(f"row {c.name!r} has no terms and the model has no variables")
            pieces = [f"+ 0 {first}"]
        pieces.append(f"{c.sense} {_num(c.rhs)}")
        lines += _wrap(f" {c.name}:", pieces)
    bounds = []
    for name, v in model.variables.items():
        _check_name(name)
        lo, up = v.lower, v.upper
        if v.kind == "binary" and lo == 0.0 and up == 1.0:
            continue
        if lo == up:
            bounds.append(f" {name} = {_num(lo)}")
        elif lo == -math.inf and up == math.inf:
            bounds.append(f" {name} free")
        elif lo == -math.inf:
            bounds.append(f" -inf <= {name} <= {_num(up)}")
        elif up == math.inf:
            if lo != 0.0:
                bounds.append(f" {name} >= {_num(lo)}")
        elif lo == 0.0:
            bounds.append(f" {name} <= {_num(up)}")
        else:
            bounds.append(f" {_num(lo)} <= {name} <= {_num(up)}")
    lines.append("Bounds")
    lines += bounds
    binaries = model.binaries()
    lines.append("Binary")
    lines += [f" {b}" for b in binaries]
    lines.append("End")
    return "\n".join(lines) + "\n"


def _parse_terms(tokens: list[str]) -> LinExpr:
    expr = LinExpr()
    i = 0
    while i < len(tokens):
        sign = 1.0
        if tokens[i] in "+-":
            sign = -1.0 if tokens[i] == "-" else 1.0
            i += 1
        coef = 1.0
        try:
            coef = float(tokens[i])
            i += 1
        except ValueError:
            pass
        name = tokens[i]
        expr.terms[name] = expr.terms.get(name, 0.0) + sign * coef
        i += 1
    return expr


def read_lp(text: str) -> MilpModel:
    """Parse LP text in the layout produced by :func:`write_lp`."""
    section = None
    model = MilpModel()
    stmts: dict[str, list[str]] = {"obj": [], "rows": [], "bounds": [], "binary": []}
    cur: list[str] | None = None
    for raw in text.splitlines():
        if section is None and raw.startswith("\\ ") and model.name == "model":
            model.name = raw[2:].strip()
        line = raw.split("\\", 1)[0].rstrip()
        key = line.strip().lower()
        if key in ("minimize", "subject to", "bounds", "binary", "end"):
            section = key
            cur = None
            continue
        if not line.strip():
            continue
        if section == "minimize":
            stmts["obj"].append(line)
        elif section == "subject to":
            if not raw.startswith("  ") or cur is None:
                cur = [line]
                stmts["rows"].append(cur)
            else:
                cur.append(line)
        elif section == "bounds":
            stmts["bounds"].append(line.strip())
        elif section == "binary":
            stmts["binary"].extend(line.split())
    binaries = set(stmts["binary"])
    objective = _parse_terms(" ".join(stmts["obj"]).split(":", 1)[1].split())
    rows = []
    for parts in stmts["rows"]:
        text_row = " ".join(parts)
        name, body = text_row.split(":", 1)
        toks = body.split()
        sense, rhs = toks[-2], float(toks[-1])
        rows.append((name.strip(), _parse_terms(toks[:-2]), sense, rhs))
    names: list[str] = []
    seen = set()
    for expr in [objective] + [r[1] for r in rows]:
        for n in expr.terms:
            if n not in seen:
                seen.add(n)
                names.append(n)
    bounds = {}
    for b in stmts["bounds"]:
        t = b.split()
        if len(t) == 2 and t[1] == "free":
            bounds[t[0]] = (-math.inf, math.inf)
        elif len(t) == 3 and t[1] == "=":
            bounds[t[0]] = (float(t[2]), float(t[2]))
        elif len(t) == 3 and t[1] == ">=":
            bounds[t[0]] = (float(t[2]), math.inf)
        elif len(t) == 3 and t[1] == "<=":
            bounds[t[0]] = (0.0, float(t[2]))
        elif len(t) == 5:
            bounds[t[2]] = (float(t[0]), float(t[4]))
        else:
            raise ModelError(f"unreadable bound {b!r}")
        if t[0] not in seen and len(t) < 5:
            seen.add(t[0])
            names.append(t[0])
    for n in binaries - seen:
        names.append(n)
    for n in names:
        lo, up = bounds.get(n, (0.0, math.inf))
        if n in binaries:
            model.add_variable(n, "binary")
            if n in bounds:
                model.variables[n] = Var(n, "binary", lo, up)
        else:
            model.add_variable(n, "continuous", lo, up)
    model.set_objective(objective)
    for name, expr, sense, rhs in rows:
        model.add_constraint(name, expr, sense, rhs)
    return model


@dataclass
class RawSolution:
    status: str
    objective: float = math.nan
    values: dict[str, float] = field(default_factory=dict)
    gap: float | None = None
    log: str = ""

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")


def default_executable() -> str:
    env = os.environ.get("FORTIFYNET_SOLVER")
    if env:
        return env
    return f"{shlex.quote(sys.executable)} -m fortifynet.highs_runner"


DEFAULT_ARGS = ("{model}", "{solution}", "--time-limit", "{time_limit}", "--gap", "{gap}", "--format", "{format}")
# Appended when a MIP start is supplied; set to () for solvers without one.
START_ARGS = ("--start", "{start}")


@dataclass
class SolverConfig:
    executable: str = field(default_factory=default_executable)
    args_template: tuple[str, ...] = DEFAULT_ARGS
    time_limit: float = 600.0
    gap_tolerance: float = 1e-6
    solution_format: str = "pairs"
    keep_artifacts: str | None = None
    start_args: tuple[str, ...] = START_ARGS

    def __post_init__(self):
        if not self.time_limit > 0:
            raise ValueError("time_limit must be positive")
        if self.gap_tolerance < 0:
            raise ValueError("gap_tolerance must be nonnegative")
        if self.solution_format not in DIALECTS:
            raise ValueError(f"unknown solution format {self.solution_format!r}")

    def command(self, model_path: str, solution_path: str, start_path: str | None = None) -> list[str]:
        subs = {
            "model": model_path,
            "solution": solution_path,
            "time_limit": _num(self.time_limit),
            "gap": _num(self.gap_tolerance),
            "format": self.solution_format,
            "start": start_path or "",
        }
        args = list(self.args_template)
        if start_path:
            args += self.start_args
        return shlex.split(self.executable) + [a.format(**subs) for a in args]


def parse_pairs(text: str) -> RawSolution:
    status, objective, gap, values = None, math.nan, None, {}
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "status":
                status = parts[1]
            elif len(parts) == 2 and parts[0] == "objective":
                objective = float(parts[1])
            elif len(parts) == 2 and parts[0] == "gap":
                gap = float(parts[1])
            continue
        name, val = line.split()
        values[name] = float(val)
    if status is None:
        raise ValueError("solution file has no status line")
    return RawSolution(status, objective, values, gap)


def _xml_status(text: str) -> str:
    s = text.lower()
    if "unbounded" in s:
        return "unbounded"
    if "infeasible" in s:
        return "infeasible"
    if "optimal" in s:
        return "optimal"
    if "feasible" in s or "limit" in s:
        return "feasible"
    return "error"


def parse_xml(text: str) -> RawSolution:
    root = ET.fromstring(text)
    header = root.find("header")
    if header is None:
        raise ValueError("XML solution has no header")
    status = _xml_status(header.get("solutionStatusString", ""))
    objective = float(header.get("objectiveValue", "nan"))
    gap = header.get("MIPRelativeGap")
    values = {v.get("name"): float(v.get("value")) for v in root.iter("variable")}
    return RawSolution(status, objective, values, float(gap) if gap is not None else None)


def write_pairs(sol: RawSolution) -> str:
    lines = [f"# status {sol.status}", f"# objective {_num(sol.objective)}"]
    if sol.gap is not None:
        lines.append(f"# gap {_num(sol.gap)}")
    lines += [f"{k} {_num(v)}" for k, v in sol.values.items()]
    return "\n".join(lines) + "\n"


def write_xml(sol: RawSolution) -> str:
    root = ET.Element("CPLEXSolution", version="1.2")
    status_text = {
        "optimal": "integer optimal solution",
        "feasible": "time limit exceeded, integer feasible",
        "infeasible": "integer infeasible",
        "unbounded": "unbounded",
        "error": "error",
    }[sol.status]
    attrs = {"objectiveValue": _num(sol.objective), "solutionStatusString": status_text}
    if sol.gap is not None:
        attrs["MIPRelativeGap"] = _num(sol.gap)
    ET.SubElement(root, "header", attrs)
    variables = ET.SubElement(root, "variables")
    for i, (k, v) in enumerate(sol.values.items()):
        ET.SubElement(variables, "variable", name=k, index=str(i), value=_num(v))
    return ET.tostring(root, encoding="unicode") + "\n"


PARSERS = {"pairs": parse_pairs, "xml": parse_xml}


def solve(model: MilpModel, config: SolverConfig | None = None, start: dict[str, float] | None = None) -> RawSolution:
    """Run the external solver on ``model``; ``start`` is an optional MIP start."""
    config = config or SolverConfig()
    workdir = tempfile.mkdtemp(prefix="fortifynet-")
    model_path = os.path.join(workdir, "model.lp")
    sol_path = os.path.join(workdir, "model.sol")
    Path(model_path).write_text(write_lp(model))
    start_path = None
    if start:
        start_path = os.path.join(workdir, "model.start")
        Path(start_path).write_text(write_pairs(RawSolution("feasible", model.objective.value(start), start)))
    cmd = config.command(model_path, sol_path, start_path)
    timed_out = False
    try:
        proc = subprocess.run(cmd, capture_output=True, text=True, timeout=config.time_limit + 60)
        log, code = proc.stdout + proc.stderr, proc.returncode
    except subprocess.TimeoutExpired as exc:
        timed_out, code = True, None
        log = f"timed out after {config.time_limit + 60:g} s\n{exc.stdout or ''}{exc.stderr or ''}"
    except OSError as exc:
        return _finish(RawSolution("error", log=f"cannot run {cmd[0]}: {exc}"), workdir, config)
    if not os.path.exists(sol_path):
        msg = f"exit code {code}; no solution file\n{log}"
        return _finish(RawSolution("error", log=msg), workdir, config)
    try:
        sol = PARSERS[config.solution_format](Path(sol_path).read_text())
    except (ValueError, ET.ParseError) as exc:
        return _finish(RawSolution("error", log=f"unparsable solution: {exc}\n{log}"), workdir, config)
    if timed_out and sol.status == "optimal":
        sol.status = "feasible"
    sol.log = log
    if sol.status in ("optimal", "feasible"):
        sol.objective += model.objective.constant
        missing = [n for n in model.variables if n not in sol.values]
        # Solvers may drop columns presolve removed; their values are zero.
        for n in missing:
            sol.values[n] = 0.0
    return _finish(sol, workdir, config)


def _finish(sol: RawSolution, workdir: str, config: SolverConfig) -> RawSolution:
    if config.keep_artifacts:
        os.makedirs(config.keep_artifacts, exist_ok=True)
        for f in os.listdir(workdir):
            shutil.copy(os.path.join(workdir, f), config.keep_artifacts)
    shutil.rmtree(workdir, ignore_errors=True)
    return sol
