"""``lattab`` command line: JSON on stdout, diagnostics on stderr.

Exit codes: 0 success, 1 numeric failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from lattab import calculus, jsonio, lattice, special, stability
from lattab.errors import DegenerateBasis, InvalidParameters, LattabError, NonPositiveArgument, PoleAt3Halves
from lattab.potentials import parse_potential
from lattab.sums import STRATEGIES, SumConfig


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def parse_lattice(text: str, V: float | None) -> lattice.LatticeParams:
    """``named:d3``, ``params:u=1,v=1,x=0,y=0.5,z=0.5`` or a JSON object; ``V`` overrides the volume."""
    if text.lstrip().startswith("{"):
        try:
            fields = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidParameters(f"lattice JSON: {exc}") from None
        if V is not None:
            fields["V"] = V
        return lattice.LatticeParams.from_dict(fields)
    kind, _, rest = text.partition(":")
    if kind == "named":
        return lattice.named(rest, 1.0 if V is None else V)
    if kind == "params":
        fields = {}
        for item in filter(None, rest.split(",")):
            key, eq, val = item.partition("=")
            if not eq:
                raise InvalidParameters(f"bad lattice field {item!r}")
            try:
                fields[key.strip()] = float(val)
            except ValueError:
                raise InvalidParameters(f"lattice field {key.strip()} is not a number: {val!r}") from None
        if V is not None:
            fields["V"] = V
        return lattice.LatticeParams.from_dict(fields)
    raise InvalidParameters(f"lattice must be named:<z3|d3|d3star> or params:u=..,v=..,x=..,y=..,z=.., got {text!r}")


def _config(args) -> SumConfig:
    return SumConfig(target_tol=args.tol, strategy=args.strategy)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=None, help="absolute target tolerance of lattice sums")
    p.add_argument("--strategy", choices=STRATEGIES, default="auto", help="summation strategy")


def _lattice_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--lattice", required=required, default=None, help="named:z3|d3|d3star, params:u=..,v=..,x=..,y=..,z=.. or a JSON object")
    p.add_argument("--volume", type=float, default=None, help="cell volume (default 1)")


# --------------------------------------------------------------------------
# handlers return a JSON-able payload (or CSV text via the "_csv" key)


def cmd_calc(args) -> dict:
    cfg = _config(args)
    pot = parse_potential(args.pot)
    params = parse_lattice(args.lattice, args.volume)
    out = {"lattice": params.to_dict(), "potential": pot.spec()}
    if args.quantity == "energy":
        r = calculus.energy(pot, params, cfg)
        out.update(energy=r.value, est_error=r.est_error, points_used=r.points_used)
    elif args.quantity == "grad":
        g = calculus.gradient(pot, params, cfg)
        out.update(gradient=g.to_dict(), norm_inf=g.norm_inf())
    else:
        h = calculus.hessian(pot, params, cfg)
        out.update(hessian=h.to_dict(), eigenvalues=h.eigenvalues())
    return out


def cmd_special(args) -> dict:
    cfg = _config(args)
    if args.function == "theta3":
        v = special.theta3_all(args.s)
        return {"s": args.s, "theta3": v.th, "d1": v.th1, "d2": v.th2, "fs1_residual": special.fs1_residual(args.s)}
    if args.function == "zeta":
        params = parse_lattice(args.lattice, args.volume)
        two_s = args.two_s if args.two_s is not None else 2.0 * args.s
        r = special.epstein_zeta(params, two_s, backend=args.backend, cfg=cfg)
        return {"lattice": params.to_dict(), "two_s": two_s, "zeta": r.value, "est_error": r.est_error, "points_used": r.points_used}
    if args.function == "theta":
        params = parse_lattice(args.lattice, args.volume)
        return {"lattice": params.to_dict(), "alpha": args.alpha, "theta": special.theta_lattice(params, args.alpha, cfg)}
    if args.function == "scalars":
        return special.spectral_scalars(args.beta, args.tmax).to_dict()
    return special.ghy(args.s, cfg)


def cmd_stability(args):
    cfg = _config(args)
    if args.action == "classify":
        pot = parse_potential(args.pot)
        return stability.classify(pot, parse_lattice(args.lattice, args.volume), cfg=cfg).to_dict()
    if args.action == "lj-z3-thresholds":
        res = stability.lj_z3_thresholds(parse_potential(args.pot), variant=args.variant, cfg=cfg)
        return {"potential": args.pot, "variant": args.variant, **{r.name: r.value for r in res}, "details": [r.to_dict() for r in res]}
    if args.action == "lj-fcc-thresholds":
        return {"potential": args.pot, **stability.lj_fcc_thresholds(parse_potential(args.pot), cfg)}
    if args.action == "sign-quantities":
        return stability.sign_quantities_theta(args.beta, method=args.method)
    grid = np.geomspace(args.alpha_min, args.alpha_max, args.points) if args.log else np.linspace(args.alpha_min, args.alpha_max, args.points)
    scan = stability.theta_alpha_scan(args.volume, grid, cfg)
    if args.csv:
        buf = io.StringIO()
        cols = list(scan["rows"][0])
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for row in scan["rows"]:
            w.writerow({k: format(v, ".17g") if isinstance(v, float) else v for k, v in row.items()})
        if args.csv == "-":
            return {"_csv": buf.getvalue()}
        with open(args.csv, "w", newline="") as fh:
            fh.write(buf.getvalue())
        scan["csv"] = args.csv
    return scan


def cmd_verify(args) -> dict:
    checks = calculus.automorph_checks(args.beta, args.tmax, printed_aut4=args.printed_aut4)
    return {
        "beta": args.beta,
        "t_max": args.tmax,
        "F": "exp(-beta R)",
        "identities": [c.to_dict() for c in checks],
        "all_passed": all(c.passed for c in checks),
    }


def cmd_lattice(args) -> dict:
    params = parse_lattice(args.lattice, args.volume)
    if args.action == "basis":
        b = lattice.basis(params)
        return {"lattice": params.to_dict(), "basis": b.matrix, "gram": lattice.gram(params), "det": float(np.linalg.det(b.matrix))}
    if args.action == "dual":
        return {"lattice": params.to_dict(), "dual": lattice.dual(params).to_dict()}
    return {"lattice": params.to_dict(), "gram": lattice.gram(params), "C": params.C}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lattab", description="Energies, derivatives and stability of 3-D Bravais lattices.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    calc = sub.add_parser("calc", help="energy, gradient or Hessian of a lattice")
    calc.add_argument("quantity", choices=["energy", "grad", "hessian"])
    _lattice_args(calc)
    calc.add_argument("--pot", required=True, help="gaussian:alpha=..  power:s=..  lj:a1=..,a2=..,x1=..,x2=..")
    _common(calc)
    calc.set_defaults(func=cmd_calc)

    spec = sub.add_parser("special", help="special functions")
    ssub = spec.add_subparsers(dest="function", required=True, parser_class=_Parser)
    t3 = ssub.add_parser("theta3", help="one-dimensional theta3(s) and its derivatives")
    t3.add_argument("--s", type=float, required=True)
    z = ssub.add_parser("zeta", help="Epstein zeta sum of |p|^(-2s)")
    _lattice_args(z)
    zs = z.add_mutually_exclusive_group(required=True)
    zs.add_argument("--two-s", type=float, help="exponent 2s of |p|")
    zs.add_argument("--s", type=float, help="half exponent s")
    z.add_argument("--backend", choices=["gamma", "direct", "r-truncated"], default="gamma")
    th = ssub.add_parser("theta", help="lattice theta function sum of exp(-alpha |p|^2)")
    _lattice_args(th)
    th.add_argument("--alpha", type=float, required=True)
    g = ssub.add_parser("ghy", help="G, H, Y and zeta_R at s")
    g.add_argument("--s", type=float, required=True)
    sc = ssub.add_parser("scalars", help="A1, A2, A3 shell sums at beta")
    sc.add_argument("--beta", type=float, required=True)
    sc.add_argument("--tmax", type=int, default=40)
    for q in (t3, z, th, g, sc):
        _common(q)
    spec.set_defaults(func=cmd_special)

    st = sub.add_parser("stability", help="classification and thresholds")
    stsub = st.add_subparsers(dest="action", required=True, parser_class=_Parser)
    cl = stsub.add_parser("classify", help="classify a critical lattice")
    _lattice_args(cl)
    cl.add_argument("--pot", required=True)
    zt = stsub.add_parser("lj-z3-thresholds", help="volume thresholds at Z3 for a Lennard-Jones potential")
    zt.add_argument("--pot", required=True)
    zt.add_argument("--variant", choices=["printed", "corrected"], default="printed")
    ft = stsub.add_parser("lj-fcc-thresholds", help="v_lo and v_hi at D3 for a Lennard-Jones potential")
    ft.add_argument("--pot", required=True)
    sq = stsub.add_parser("sign-quantities", help="D3 Gaussian sign quantities at beta")
    sq.add_argument("--beta", type=float, required=True)
    sq.add_argument("--method", choices=["auto", "shells", "hessian"], default="auto")
    ts = stsub.add_parser("theta-scan", help="Gaussian alpha scan at D3 and D3*")
    ts.add_argument("--volume", type=float, default=1.0)
    ts.add_argument("--alpha-min", type=float, default=0.05)
    ts.add_argument("--alpha-max", type=float, default=15.0)
    ts.add_argument("--points", type=int, default=60)
    ts.add_argument("--log", action="store_true", help="log-spaced grid")
    ts.add_argument("--csv", default=None, help="write one row per grid point to this path ('-' for stdout)")
    for q in (cl, zt, ft, sq, ts):
        _common(q)
    st.set_defaults(func=cmd_stability)

    ver = sub.add_parser("verify", help="numerical identity suites")
    vsub = ver.add_subparsers(dest="suite", required=True, parser_class=_Parser)
    au = vsub.add_parser("automorphs", help="the nineteen automorph identities of R")
    au.add_argument("--beta", type=float, default=1.0)
    au.add_argument("--tmax", type=int, default=40)
    au.add_argument("--printed-aut4", action="store_true", help="use the published (false) form of the fourth identity")
    _common(au)
    ver.set_defaults(func=cmd_verify)

    lat = sub.add_parser("lattice", help="basis, Gram matrix or dual of a lattice")
    lat.add_argument("action", choices=["basis", "gram", "dual"])
    _lattice_args(lat)
    _common(lat)
    lat.set_defaults(func=cmd_lattice)
    return p


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    config = {k: v for k, v in vars(args).items() if k != "func"}
    try:
        payload = args.func(args)
    except (InvalidParameters, NonPositiveArgument, PoleAt3Halves, DegenerateBasis) as exc:
        print(f"lattab: error: {exc}", file=stderr)
        return 2
    except LattabError as exc:
        diag = {"error": type(exc).__name__, "message": str(exc)}
        partial = getattr(exc, "partial", None)
        if partial is not None:
            diag["partial"] = partial
        print(jsonio.dumps({"manifest": jsonio.manifest(argv, config), **diag}), file=stdout)
        print(f"lattab: {type(exc).__name__}: {exc}", file=stderr)
        return 1
    if isinstance(payload, dict) and "_csv" in payload:
        stdout.write(payload["_csv"])
        return 0
    print(jsonio.dumps({"manifest": jsonio.manifest(argv, config), "result": payload}), file=stdout)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
