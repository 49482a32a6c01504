import json
import os
import subprocess
import sys

import numpy as np
import pytest

from lattab import _backend, _kernels_py
from lattab.lattice import D3, Z3, gram

compiled = pytest.importorskip("lattab._kernels")

GRAMS = {"z3": gram(Z3), "d3": gram(D3), "skew": np.array([[1.3, 0.2, -0.1], [0.2, 0.9, 0.3], [-0.1, 0.3, 1.1]])}


@pytest.mark.parametrize("name", sorted(GRAMS))
@pytest.mark.parametrize("cutoff", [0.5, 3.0, 20.0])
def test_ball_points_identical(name, cutoff):
    G = GRAMS[name]
    a = compiled.ball_points(G, cutoff)
    b = _kernels_py.ball_points(G, cutoff)
    assert a.dtype == b.dtype == np.int64
    assert np.array_equal(a, b)


def test_ball_points_brute(rng):  # [DERIVED] compare to exhaustive box filter
    G = GRAMS["skew"]
    r = np.arange(-8, 9)
    box = np.stack(np.meshgrid(r, r, r, indexing="ij"), -1).reshape(-1, 3)
    box = box[np.any(box != 0, axis=1)]
    q = np.einsum("ki,ij,kj->k", box, G, box)
    want = {tuple(k) for k in box[q <= 6.0]}
    got = {tuple(k) for k in compiled.ball_points(G, 6.0)}
    assert got == want


def test_quad_values_close(rng):
    pts = rng.integers(-50, 51, size=(500, 3)).astype(np.int64)
    G = GRAMS["skew"]
    np.testing.assert_allclose(compiled.quad_values(pts, G), _kernels_py.quad_values(pts, G), rtol=1e-14)


def test_compensated_sums(rng):
    x = np.concatenate([[1e16, 1.0, -1e16], rng.normal(size=1000)])
    exact = float(np.sum(x[3:], dtype=np.longdouble)) + 1.0
    assert compiled.compensated_sum(x) == pytest.approx(exact, abs=1e-12)
    assert _kernels_py.compensated_sum(x) == pytest.approx(exact, abs=1e-12)
    w, f = rng.normal(size=300), rng.normal(size=300)
    assert compiled.compensated_dot(w, f) == pytest.approx(_kernels_py.compensated_dot(w, f), rel=1e-14)
    with pytest.raises(ValueError):
        compiled.compensated_dot(w, f[:-1])


def test_jet_sums_agree(rng):
    G = GRAMS["d3"]
    pts = compiled.ball_points(G, 25.0)
    q = compiled.quad_values(pts, G)
    g1, g2 = -np.exp(-q), np.exp(-q)
    D = rng.normal(size=(5, 3, 3))
    D = D + D.transpose(0, 2, 1)
    D2 = rng.normal(size=(5, 5, 3, 3))
    D2 = D2 + D2.transpose(1, 0, 3, 2)
    a1, a2 = compiled.jet_sums(pts, D, D2, g1, g2)
    b1, b2 = _kernels_py.jet_sums(pts, D, D2, g1, g2)
    np.testing.assert_allclose(a1, b1, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(a2, b2, rtol=1e-12, atol=1e-14)
    c1, c2 = compiled.jet_sums(pts, D, None, g1, None)
    assert c2 is None and np.array_equal(c1, a1)


def test_selected_backend_is_compiled():
    if os.environ.get("LATTAB_PURE_PYTHON", "") in ("", "0"):
        assert _backend.NAME == "compiled"


def test_pure_python_end_to_end():
    code = (
        "import json; from lattab import _backend; from lattab.calculus import hessian;"
        "from lattab.lattice import D3; from lattab.potentials import Gaussian;"
        "print(json.dumps([_backend.NAME, hessian(Gaussian(1.0), D3).matrix.tolist()]))"
    )
    env = dict(os.environ)
    res = {}
    for flag in ("1", "0"):
        env["LATTAB_PURE_PYTHON"] = flag
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        res[flag] = json.loads(out.stdout)
    assert res["1"][0] == "python" and res["0"][0] == "compiled"
    np.testing.assert_allclose(res["1"][1], res["0"][1], rtol=1e-11, atol=1e-13)


def test_benchmark_script_runs(tmp_path):
    out = tmp_path / "bench.json"
    script = os.path.join(os.path.dirname(__file__), "..", "benchmarks", "bench_kernels.py")
    subprocess.run([sys.executable, script, "--repeat", "1", "--json", str(out)], check=True, capture_output=True)
    rows = json.loads(out.read_text())["rows"]
    assert len(rows) == 7 and all(r["compiled_s"] > 0 and r["python_s"] > 0 for r in rows)
