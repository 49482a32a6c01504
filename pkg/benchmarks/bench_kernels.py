"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N] [--json PATH]

Each row times one kernel on identical inputs with both backends, then an
end-to-end Hessian evaluation with the backend swapped in ``lattab._backend``.
"""

import argparse
import json
import timeit
from contextlib import contextmanager

import numpy as np

from lattab import _backend, _kernels_py
from lattab.calculus import hessian
from lattab.lattice import D3, gram
from lattab.potentials import CLASSICAL_LJ, Gaussian

try:
    from lattab import _kernels
except ImportError:  # pragma: no cover
    _kernels = None

KERNELS = ("ball_points", "quad_values", "compensated_sum", "compensated_dot", "jet_sums")


@contextmanager
def use_backend(impl):
    saved = {k: getattr(_backend, k) for k in KERNELS}
    for k in KERNELS:
        setattr(_backend, k, getattr(impl, k))
    try:
        yield
    finally:
        for k, v in saved.items():
            setattr(_backend, k, v)


def cases():
    G = gram(D3)
    pts = _kernels_py.ball_points(G, 400.0)
    q = _kernels_py.quad_values(pts, G)
    g1, g2 = -np.exp(-0.05 * q), np.exp(-0.05 * q)
    rng = np.random.default_rng(0)
    D = rng.normal(size=(5, 3, 3))
    D2 = rng.normal(size=(5, 5, 3, 3))
    x = rng.normal(size=len(pts))
    return {
        "ball_points (cutoff 400)": lambda k: k.ball_points(G, 400.0),
        "quad_values": lambda k: k.quad_values(pts, G),
        "compensated_sum": lambda k: k.compensated_sum(x),
        "compensated_dot": lambda k: k.compensated_dot(x, q),
        "jet_sums (order 2)": lambda k: k.jet_sums(pts, D, D2, g1, g2),
    }, len(pts)


def best(fn, repeat: int) -> float:
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", default=None, help="also write the table to this file")
    args = ap.parse_args()
    if _kernels is None:
        raise SystemExit("compiled extension not built; run `pip install --no-build-isolation -e .`")

    table, npts = cases()
    rows = []
    for name, fn in table.items():
        tc = best(lambda: fn(_kernels), args.repeat)
        tp = best(lambda: fn(_kernels_py), args.repeat)
        rows.append({"case": name, "compiled_s": tc, "python_s": tp})
    for label, pot in (("hessian D3, Gaussian(0.3)", Gaussian(0.3)), ("hessian D3, LJ 12-6", CLASSICAL_LJ)):
        times = {}
        for key, impl in (("compiled_s", _kernels), ("python_s", _kernels_py)):
            with use_backend(impl):
                times[key] = best(lambda: hessian(pot, D3), args.repeat)
        rows.append({"case": label, **times})

    print(f"{npts} lattice points per kernel call, best of {args.repeat}")
    print(f"{'case':32s} {'compiled':>11s} {'fallback':>11s} {'speedup':>8s}")
    for r in rows:
        r["speedup"] = r["python_s"] / r["compiled_s"]
        print(f"{r['case']:32s} {r['compiled_s'] * 1e3:9.2f}ms {r['python_s'] * 1e3:9.2f}ms {r['speedup']:7.1f}x")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"points": npts, "repeat": args.repeat, "rows": rows}, fh, indent=2)


if __name__ == "__main__":
    main()
