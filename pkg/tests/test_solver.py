import math
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fortifynet.kshortest import build_route_sets
from fortifynet.milp import LinExpr, MilpModel
from fortifynet.models import baseline_weights, build_model
from fortifynet.network import sioux_falls, sioux_falls_demand, sioux_falls_fortification
from fortifynet.scenarios import builtin_catalog
from fortifynet.solver import (
    RawSolution,
    SolverConfig,
    parse_pairs,
    parse_xml,
    read_lp,
    solve,
    write_lp,
    write_pairs,
    write_xml,
)
from test_milp import small_model

GOLDEN = """\\ small
Minimize
 obj: + 2 x(1) + 1 y
Subject To
 cap: + 1 y - 4 x(1) <= 0
 need: + 1 x(1) + 1 y >= 2
Bounds
 y <= 4
Binary
 x(1)
End
"""


def test_lp_text_is_stable():
    assert write_lp(small_model()) == GOLDEN
    assert write_lp(small_model()) == write_lp(small_model())


def test_lp_round_trip():
    m = small_model()
    back = read_lp(write_lp(m))
    assert write_lp(back) == write_lp(m)
    assert back.variables == m.variables


def test_long_rows_wrap():
    m = MilpModel("wide")
    for i in range(40):
        m.add_variable(f"flow_variable({i})")
    m.add_constraint("sum", {f"flow_variable({i})": 1.0 for i in range(40)}, "<=", 10.0)
    m.set_objective({f"flow_variable({i})": 1.0 for i in range(40)})
    text = write_lp(m)
    assert max(len(line) for line in text.splitlines()) <= 100
    assert write_lp(read_lp(text)) == text


def test_bounds_section_forms():
    m = MilpModel("b")
    m.add_variable("free", lower=-math.inf)
    m.add_variable("fixed", lower=2.5, upper=2.5)
    m.add_variable("box", lower=-1.0, upper=3.0)
    m.add_variable("low", lower=1.0)
    m.add_variable("neg", lower=-math.inf, upper=0.0)
    m.set_objective({"free": 1.0, "fixed": 1.0, "box": 1.0, "low": 1.0, "neg": 1.0})
    text = write_lp(m)
    for line in (" free free", " fixed = 2.5", " -1 <= box <= 3", " low >= 1", " -inf <= neg <= 0"):
        assert line in text.splitlines()
    assert read_lp(text).variables == m.variables


def test_solve_small_model_optimum():
    sol = solve(small_model(), SolverConfig())
    assert sol.status == "optimal"
    # x = 0 forces y <= 0, so x = 1 and y = 1.
    assert sol.objective == pytest.approx(3.0)
    assert sol.values["x(1)"] == pytest.approx(1.0)


def test_objective_constant_added_back():
    m = small_model()
    m.objective.constant = 10.0
    assert solve(m).objective == pytest.approx(13.0)


def test_infeasible_model():
    m = MilpModel("inf")
    m.add_variable("a", upper=1.0)
    m.add_constraint("c", {"a": 1.0}, ">=", 2.0)
    m.set_objective({"a": 1.0})
    assert solve(m).status == "infeasible"


def test_xml_dialect():
    sol = solve(small_model(), SolverConfig(solution_format="xml"))
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(3.0)


def test_missing_executable_is_solver_error():
    sol = solve(small_model(), SolverConfig(executable="/nonexistent/solver"))
    assert sol.status == "error"


def test_environment_override(monkeypatch, tmp_path):
    script = tmp_path / "fake.py"
    script.write_text(
        "import sys\n"
        "open(sys.argv[2], 'w').write('# status feasible\\n# objective 7\\n# gap 0.5\\nx(1) 1\\n')\n"
    )
    monkeypatch.setenv("FORTIFYNET_SOLVER", f"{sys.executable} {script}")
    sol = solve(small_model(), SolverConfig(keep_artifacts=str(tmp_path / "kept")))
    assert (sol.status, sol.objective, sol.gap) == ("feasible", 7.0, 0.5)
    assert sol.values == {"x(1)": 1.0, "y": 0.0}
    assert (tmp_path / "kept" / "model.lp").read_text() == GOLDEN


def test_solver_without_output_file(tmp_path):
    script = tmp_path / "quiet.py"
    script.write_text("print('nothing')\n")
    sol = solve(small_model(), SolverConfig(executable=f"{sys.executable} {script}"))
    assert sol.status == "error" and "no solution file" in sol.log


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(time_limit=0)
    with pytest.raises(ValueError):
        SolverConfig(solution_format="mps")
    with pytest.raises(ValueError):
        RawSolution("done")


values = st.dictionaries(st.from_regex(r"[a-z][a-z0-9_().]{0,8}", fullmatch=True),
                         st.floats(-1e9, 1e9, allow_nan=False), max_size=6)


@settings(max_examples=60)
@given(st.sampled_from(["optimal", "feasible"]), st.floats(-1e6, 1e6, allow_nan=False), values)
def test_dialects_round_trip(status, obj, vals):
    raw = RawSolution(status, obj, vals, 0.01)
    for write, parse in ((write_pairs, parse_pairs), (write_xml, parse_xml)):
        back = parse(write(raw))
        assert (back.status, back.objective, back.values, back.gap) == (status, obj, vals, 0.01)


def test_sioux_falls_rn_lists_one_binary_per_node():
    net, dem = sioux_falls(), sioux_falls_demand()
    routes = build_route_sets(net, dem)
    W = baseline_weights(net, dem, routes, fort=sioux_falls_fortification())
    m = build_model("rn", net, dem, routes, builtin_catalog(), sioux_falls_fortification(), weights=W)
    text = write_lp(m)
    binaries = text.split("\nBinary\n", 1)[1].split()
    assert sorted(b for b in binaries if b.startswith("x(")) == sorted(f"x({i})" for i in net.nodes)
    assert m.validate() == []


def test_million_term_row_is_accepted():
    m = MilpModel("wide")
    names = [f"v{k}" for k in range(1_000_000)]
    for n in names:
        m.add_variable(n, upper=1.0)
    m.add_constraint("all", LinExpr(dict.fromkeys(names, 1.0)), "<=", 10.0)
    assert len(m.constraints[0].expr.terms) == 1_000_000
