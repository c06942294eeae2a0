import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from fortifynet.cli import main

DATA = Path(__file__).parent / "data"
TINY = ["--net", str(DATA / "tiny_net.tntp"), "--demand", str(DATA / "tiny_demand.csv"), "--demand-scale", "1"]


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_routes_command(tmp_path):
    assert main(["routes", *TINY, "--k", "2", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "routes.csv")
    assert [(r["origin"], r["destination"], r["route"]) for r in rows][:2] == [("1", "4", "1"), ("1", "4", "2")]


def test_measures_command_subset(tmp_path):
    assert main(["measures", *TINY, "--measures", "PageRank,degree", "--top", "2", "--out", str(tmp_path)]) == 0
    ranks = read_csv(tmp_path / "rankings.csv")
    assert {r["measure"] for r in ranks} == {"PageRank", "DegreeCentrality"}
    assert json.loads((tmp_path / "measures.json").read_text())


def test_scenarios_command_builtin(tmp_path):
    assert main(["scenarios", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "scenarios.csv")
    assert len(rows) == 27 and rows[0]["scenario"] == "xi_1"


def test_solve_writes_reports(tmp_path):
    code = main(["solve", *TINY, "--scenarios", str(DATA / "tiny_scenarios.json"), "--model", "rnra",
                 "--nf", "1", "--delta", "0.5", "--out", str(tmp_path)])
    assert code == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["status"] == "optimal" and rep["model"] == "rnra"
    assert rep["risk"] == {"epsilon": 0.1, "delta": 0.5}
    assert all(len(v) == 64 for v in rep["inputs"].values())
    assert "created" in rep["metadata"]
    table = read_csv(tmp_path / "scenario_table.csv")
    assert [r["scenario"] for r in table] == ["a", "b"]
    for name in ("fortified.csv", "route_flows.csv", "undelivered.csv", "od_max_time.csv",
                 "plot_undelivered.csv", "plot_travel_time.csv", "model.lp", "model.manifest.json"):
        assert (tmp_path / name).exists()


def test_solve_is_deterministic_apart_from_metadata(tmp_path):
    args = ["solve", *TINY, "--scenarios", str(DATA / "tiny_scenarios.json"), "--model", "rn", "--nf", "1"]
    assert main([*args, "--out", str(tmp_path / "a")]) == 0
    assert main([*args, "--out", str(tmp_path / "b")]) == 0
    a = json.loads((tmp_path / "a" / "report.json").read_text())
    b = json.loads((tmp_path / "b" / "report.json").read_text())
    a.pop("metadata"), b.pop("metadata")
    assert a == b
    assert (tmp_path / "a" / "model.lp").read_bytes() == (tmp_path / "b" / "model.lp").read_bytes()


def test_sweep_summary(tmp_path):
    code = main(["sweep", *TINY, "--scenarios", str(DATA / "tiny_scenarios.json"), "--nf", "1",
                 "--deltas", "0.3,0.9", "--jobs", "2", "--out", str(tmp_path)])
    assert code == 0
    summary = read_csv(tmp_path / "sweep_summary.csv")
    assert [r["strategy"] for r in summary] == ["rn", "ra", "rnra(0.3)", "rnra(0.9)"]
    rows = read_csv(tmp_path / "sweep.csv")
    assert len(rows) == 4 * 2


def test_input_error_exit_code(tmp_path):
    assert main(["routes", "--net", str(tmp_path / "missing.tntp"), "--out", str(tmp_path)]) == 4
    bad = tmp_path / "bad.csv"
    bad.write_text("origin,destination,demand\n1,99,5\n")
    assert main(["routes", "--net", str(DATA / "tiny_net.tntp"), "--demand", str(bad), "--out", str(tmp_path)]) == 4


def test_infeasible_exit_code(tmp_path):
    script = tmp_path / "infeasible.py"
    script.write_text("import sys\nopen(sys.argv[2], 'w').write('# status infeasible\\n')\n")
    code = main(["solve", *TINY, "--model", "baseline", "--solver", f"{sys.executable} {script}",
                 "--out", str(tmp_path / "o")])
    assert code == 2


def test_solver_error_exit_code(tmp_path):
    code = main(["solve", *TINY, "--model", "baseline", "--solver", "/nonexistent/solver",
                 "--out", str(tmp_path / "o")])
    assert code == 3


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "fortifynet", "routes", *TINY, "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
