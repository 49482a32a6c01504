import csv
import io
import json
import subprocess
import sys

import pytest

from lattab.cli import run

SUBCOMMANDS = [
    ["calc"],
    ["special"],
    ["special", "theta3"],
    ["special", "zeta"],
    ["special", "theta"],
    ["special", "ghy"],
    ["special", "scalars"],
    ["stability"],
    ["stability", "classify"],
    ["stability", "lj-z3-thresholds"],
    ["stability", "lj-fcc-thresholds"],
    ["stability", "sign-quantities"],
    ["stability", "theta-scan"],
    ["verify"],
    ["verify", "automorphs"],
    ["lattice"],
]


def invoke(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def result_of(*argv):
    code, out, err = invoke(*argv)
    assert code == 0, err
    return json.loads(out)["result"]


def test_automorphs_example():
    res = result_of("verify", "automorphs", "--beta", "1", "--tmax", "40")
    ids = res["identities"]
    assert len(ids) == 19
    for row in ids:
        assert {"lhs", "rhs", "residual"} <= set(row)
        assert abs(row["residual"]) < 1e-10 and row["passed"]


def test_printed_aut4_fails():
    res = result_of("verify", "automorphs", "--printed-aut4")
    bad = [r["name"] for r in res["identities"] if not r["passed"]]
    assert bad == ["aut4"]


def test_lj_thresholds_example():
    res = result_of("stability", "lj-z3-thresholds", "--pot", "lj:a1=2,a2=1,x1=3,x2=6")
    for k, v in {"V1": 1.200, "V2": 1.344, "V3": 1.482, "V4": 1.5797}.items():
        assert res[k] == pytest.approx(v, abs=0.002)


def test_grad_example():
    res = result_of("calc", "grad", "--lattice", "named:d3", "--volume", "1", "--pot", "gaussian:alpha=1")
    comps = [res["gradient"][f"d_{k}"] for k in "uvxyz"]
    assert max(abs(c) for c in comps) < 1e-10 and res["norm_inf"] < 1e-10


def test_manifest_contents():
    code, out, _ = invoke("lattice", "gram", "--lattice", "named:z3")
    man = json.loads(out)["manifest"]
    assert code == 0
    assert man["command"].startswith("lattab lattice gram")
    assert {"lattab", "format", "backend"} <= set(man["versions"])
    assert "timestamp" in man


def test_byte_identical_apart_from_timestamp():
    argv = ["calc", "hessian", "--lattice", "named:d3star", "--pot", "lj:a1=2,a2=1,x1=3,x2=6", "--volume", "1.2"]
    a = json.loads(invoke(*argv)[1])
    b = json.loads(invoke(*argv)[1])
    a["manifest"].pop("timestamp")
    b["manifest"].pop("timestamp")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_json_lattice_input():
    lat = json.dumps({"u": 2 ** (1 / 3), "v": 1, "x": 0, "y": 0, "z": 0})
    res = result_of("special", "zeta", "--lattice", lat, "--two-s", "4")
    val = res["zeta"]
    assert val == pytest.approx(16.532315959761316, rel=1e-12)
    same = result_of("special", "zeta", "--lattice", "params:u=1.2599210498948732,v=1,x=0,y=0,z=0", "--two-s", "4")
    assert same["zeta"] == pytest.approx(val, rel=1e-12)


def test_csv_scan(tmp_path):
    path = tmp_path / "scan.csv"
    code, _, err = invoke("stability", "theta-scan", "--points", "5", "--log", "--csv", str(path))
    assert code == 0, err
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == 5 and {"alpha", "d3", "d3star"} <= set(rows[0])
    code, out, _ = invoke("stability", "theta-scan", "--points", "3", "--csv", "-")
    assert code == 0 and out.splitlines()[0].startswith("alpha")


@pytest.mark.parametrize("path", SUBCOMMANDS, ids=lambda p: "-".join(p))
def test_help(path, capsys):
    assert run(path + ["--help"]) == 0
    assert "usage" in capsys.readouterr().out


@pytest.mark.parametrize(
    "argv",
    [
        ["calc", "energy", "--lattice", "named:d3", "--pot", "gaussian:alpha=1", "--bogus"],
        ["frobnicate"],
        ["calc", "energy", "--lattice", "named:nope", "--pot", "gaussian:alpha=1"],
        ["calc", "energy", "--lattice", "named:d3", "--pot", "gaussian:alpha=-1"],
        ["special", "theta3", "--s", "-1"],
        ["special", "zeta", "--lattice", "named:z3", "--s", "1.5"],
        ["lattice", "gram", "--lattice", "params:u=1,v=1,x=0,y=0,z=0", "--volume", "-2"],
    ],
)
def test_usage_errors_exit_2(argv):
    code, out, err = invoke(*argv)
    assert code == 2 and err.strip()


def test_budget_exit_1_with_partial():
    code, out, err = invoke("special", "zeta", "--lattice", "named:z3", "--s", "1.55", "--backend", "direct", "--tol", "1e-12")
    assert code == 1
    payload = json.loads(out)
    assert payload["error"] == "Budget"
    part = payload["partial"]
    assert part["converged"] is False and part["points_used"] > 0 and part["est_error"] > 0


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "lattab.cli", "special", "theta3", "--s", "1"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]
