"""Critical-point classification, volume thresholds and the Gaussian alpha scan."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from lattab import _backend
from lattab.calculus import energy_jet, hessian, lj_h_values
from lattab.errors import InvalidParameters, NoBracket, NotCritical
from lattab.lattice import D3, D3STAR, NAMED, LatticeParams
from lattab.potentials import Gaussian, LennardJones, Potential
from lattab.special import g_function, h_function, spectral_scalars
from lattab.sums import SumConfig

LOCAL_MIN = "LocalMin"
LOCAL_MAX = "LocalMax"
SADDLE = "Saddle"
DEGENERATE = "Degenerate"


def parallel_map(fn, items) -> list:
    """Ordered map over ``items`` using up to ``LATTAB_THREADS`` workers."""
    items = list(items)
    workers = min(_backend.threads(), len(items)) or 1
    if workers == 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class StabilityReport:
    lattice: LatticeParams
    potential: str
    classification: str
    eigenvalues: tuple
    gradient_norm: float
    energy: float
    tolerances: dict
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "lattice": self.lattice.to_dict(),
            "potential": self.potential,
            "classification": self.classification,
            "eigenvalues": list(self.eigenvalues),
            "gradient_norm": self.gradient_norm,
            "energy": self.energy,
            "tolerances": dict(self.tolerances),
            "provenance": dict(self.provenance),
        }


def classify_eigenvalues(eigs, eig_tol: float) -> str:
    eigs = np.asarray(eigs)
    if np.any(np.abs(eigs) <= eig_tol):
        return DEGENERATE
    if np.all(eigs > 0):
        return LOCAL_MIN
    if np.all(eigs < 0):
        return LOCAL_MAX
    return SADDLE


def classify(
    pot: Potential,
    params: LatticeParams,
    V: float | None = None,
    cfg: SumConfig | None = None,
    grad_tol: float | None = None,
    eig_tol_rel: float = 1e-8,
) -> StabilityReport:
    """Classify a critical point from the eigenvalues of the 5x5 Hessian.

    ``grad_tol`` defaults to ``1e-7 (|E| + 1)``; eigenvalues with
    ``|lambda| <= eig_tol_rel * max|lambda|`` count as zero.
    """
    if V is not None:
        params = params.with_volume(V)
    cfg = cfg or SumConfig()
    j = energy_jet(pot, params, cfg, order=2)
    gnorm = float(np.max(np.abs(j.grad)))
    gtol = 1e-7 * (abs(j.value) + 1.0) if grad_tol is None else grad_tol
    if not gnorm < gtol:
        raise NotCritical(f"gradient norm {gnorm:.3e} exceeds grad_tol {gtol:.3e}")
    eigs = np.linalg.eigvalsh(0.5 * (j.hess + j.hess.T))
    eig_tol = eig_tol_rel * float(np.max(np.abs(eigs)))
    return StabilityReport(
        lattice=params,
        potential=pot.spec(),
        classification=classify_eigenvalues(eigs, eig_tol),
        eigenvalues=tuple(float(e) for e in eigs),
        gradient_norm=gnorm,
        energy=float(j.value),
        tolerances={"grad_tol": gtol, "eig_tol": eig_tol},
        provenance={"sum_config": cfg.to_dict(), "est_error": j.est_error, "backend": _backend.NAME},
    )


def classify_sweep(pot: Potential, lattice: str, volumes, cfg: SumConfig | None = None) -> list[StabilityReport]:
    base = NAMED[lattice]
    return parallel_map(lambda V: classify(pot, base.with_volume(float(V)), cfg=cfg), volumes)


# --------------------------------------------------------------------------
# root finding


@dataclass(frozen=True)
class ThresholdResult:
    name: str
    value: float
    bracket: tuple
    residual: float
    criterion: str

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "bracket": list(self.bracket),
            "residual": self.residual,
            "criterion": self.criterion,
        }


def scan_brackets(fn, lo: float, hi: float, step: float) -> list[tuple[float, float]]:
    """Grid intervals on which ``fn`` changes sign."""
    n = int(round((hi - lo) / step))
    xs = lo + step * np.arange(n + 1)
    sg = np.sign([fn(x) for x in xs])
    out = []
    for i in range(n):
        if sg[i] * sg[i + 1] < 0:
            out.append((float(xs[i]), float(xs[i + 1])))
        elif sg[i + 1] == 0 and i + 2 <= n and sg[i] * sg[i + 2] < 0:
            # root sits on a grid point; widen to its neighbours
            out.append((float(xs[i]), float(xs[i + 2])))
    return out


def bisect(fn, lo: float, hi: float, xtol: float = 1e-6) -> tuple[float, float]:
    flo = fn(lo)
    if np.sign(flo) * np.sign(fn(hi)) >= 0:
        raise NoBracket(f"no sign change on [{lo}, {hi}]")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    return lo, hi


def _roots(fn, name_list, criterion, lo, hi, step, required: bool):
    out = []
    brackets = scan_brackets(fn, lo, hi, step)
    if required and len(brackets) < len(name_list):
        raise NoBracket(f"{criterion}: found {len(brackets)} sign change(s) in [{lo}, {hi}], need {len(name_list)}")
    for name, (a, b) in zip(name_list, brackets):
        a, b = bisect(fn, a, b)
        mid = 0.5 * (a + b)
        out.append(ThresholdResult(name, mid, (a, b), float(fn(mid)), criterion))
    return out


def lj_z3_thresholds(
    pot: LennardJones,
    variant: str = "printed",
    window: tuple[float, float] = (0.5, 3.0),
    step: float = 0.01,
    cfg: SumConfig | None = None,
) -> list[ThresholdResult]:
    """Volumes where the Z^3 Hessian entries assembled from ``h1..h4`` change sign.

    ``V1``: zero of ``xx``; ``V3``: zero of ``uu``; ``V2 < V4``: zeros of
    ``uu vv - uv^2``.  With ``variant="corrected"`` the determinant is a
    perfect square and has no sign change, so only ``V1`` and ``V3`` are returned.
    """
    if not pot.x1 > 1.5:
        raise InvalidParameters("Z^3 thresholds need x1 > 3/2")
    hv = {x: lj_h_values(x, variant, cfg=cfg) for x in (pot.x1, pot.x2)}

    def entries(V):
        C = LatticeParams(1.0, 1.0, 0.0, 0.0, 0.0, V).C
        e = {"uu": 0.0, "vv": 0.0, "xx": 0.0, "uv": 0.0}
        for a, x, sign in ((pot.a2, pot.x2, 1.0), (pot.a1, pot.x1, -1.0)):
            h1, h2, h3, h4 = hv[x]
            k = sign * a * x / C**x
            e["uu"] += k * 2 ** ((x + 1) / 3) * h1
            e["vv"] += k * 2 ** (3 + x / 3) * h2
            e["xx"] += k * 2 ** (1 + x / 3) * h3
            e["uv"] += k * 2 ** ((x + 2) / 3) * h4
        return e

    xx = lambda V: entries(V)["xx"]  # noqa: E731
    uu = lambda V: entries(V)["uu"]  # noqa: E731

    def det(V):
        e = entries(V)
        return e["uu"] * e["vv"] - e["uv"] ** 2

    lo, hi = window
    out = _roots(xx, ["V1"], "d2E/dx2 at Z3 (h3 combination)", lo, hi, step, True)
    out += _roots(det, ["V2", "V4"], "uu*vv - uv^2 at Z3 (h1, h2, h4 combinations)", lo, hi, step, variant == "printed")
    out += _roots(uu, ["V3"], "d2E/du2 at Z3 (h1 combination)", lo, hi, step, True)
    order = {"V1": 0, "V2": 1, "V3": 2, "V4": 3}
    return sorted(out, key=lambda r: order[r.name])


def lj_fcc_thresholds(pot: LennardJones, cfg: SumConfig | None = None) -> dict:
    """``v_lo`` / ``v_hi`` from the ratios of ``G`` and ``H`` at the two exponents."""
    G1, G2 = g_function(pot.x1, cfg), g_function(pot.x2, cfg)
    H1, H2 = h_function(pot.x1, cfg), h_function(pot.x2, cfg)
    if min(G1, G2, H1, H2) <= 0:
        raise InvalidParameters("G and H must be positive at both exponents")
    p = 3.0 / (2.0 * (pot.x2 - pot.x1))
    rg = (pot.a2 * G2 / (pot.a1 * G1)) ** p / math.sqrt(2.0)
    rh = (pot.a2 * H2 / (pot.a1 * H1)) ** p / math.sqrt(2.0)
    return {
        "v_lo": min(rg, rh),
        "v_hi": max(rg, rh),
        "v_G": rg,
        "v_H": rh,
        "G": {"x1": G1, "x2": G2},
        "H": {"x1": H1, "x2": H2},
    }


# --------------------------------------------------------------------------
# Gaussian alpha regimes at D3


def sign_quantities_theta(beta: float, method: str = "auto", t_max: int = 40) -> dict:
    """``q_uu, q_xx, q_zz`` and the two 2x2 determinants at D3, with ``beta = C alpha``.

    ``method="shells"`` assembles them from ``A1, A2, A3``.  These sums are
    O(beta^-3.5) while the quantities become exponentially small as beta
    shrinks, so ``auto`` switches to the D3 Hessian (dual-lattice
    summation) whenever a shell value is below its own rounding floor.
    """
    if not beta > 0:
        raise InvalidParameters("beta must be positive")
    S = spectral_scalars(beta, t_max)
    A1, A2, A3 = S.A1, S.A2, S.A3
    b = beta
    shells = {
        "q_uu": b * (A1 + 12 * A3) - 4 * A2,
        "q_xx": b * (A1 + 4 * A3) - 3 * A2,
        "q_zz": b * (A1 - 4 * A3) - 2 * A2,
        "det_uv": (A1 + 12 * A3) * (A1 - 4 * A3) * b**4 / 6 - (3 * A1 * A2 + 4 * A2 * A3) * b**3 / 3 + 4 * A2**2 * b**2 / 3,
        "det_xy": (A1 + 12 * A3) * (A1 - 4 * A3) * b**4 / 9 - 2 * (3 * A1 * A2 + 4 * A2 * A3) * b**3 / 9 + 8 * A2**2 * b**2 / 9,
    }
    eps = 1e-13
    lin = b * (A1 + 12 * abs(A3)) + 4 * A2
    floors = {
        "q_uu": eps * lin,
        "q_xx": eps * lin,
        "q_zz": eps * lin,
        "det_uv": eps * lin**2 * b**2,
        "det_xy": eps * lin**2 * b**2,
    }
    resolved = all(abs(shells[k]) > 100 * floors[k] for k in shells)
    if method == "shells" or (method == "auto" and resolved):
        out, used = shells, "shells"
    elif method in ("auto", "hessian"):
        C = D3.C
        H = hessian(Gaussian(b / C), D3).matrix
        out = {
            "q_uu": 2 * H[0, 0] / b,
            "q_xx": 3 * H[2, 2] / b,
            "q_zz": 3 * H[4, 4] / (2 * b),
            "det_uv": H[0, 0] * H[1, 1] - H[0, 1] ** 2,
            "det_xy": H[2, 2] * H[3, 3] - H[2, 3] ** 2,
        }
        used = "hessian"
    else:
        raise InvalidParameters(f"unknown method {method!r}")
    return {"beta": beta, **{k: float(v) for k, v in out.items()}, "method": used, "scalars": S.to_dict()}


QUANTITIES = ("q_uu", "q_xx", "q_zz", "det_uv", "det_xy")


def theta_alpha_scan(V: float, alpha_grid, cfg: SumConfig | None = None, refine: bool = True) -> dict:
    """Classify D3 and D3* over ``alpha_grid`` and locate sign changes.

    Each of the five D3 quantities is bisected between grid points where it
    changes sign.  ``alpha_hat_0`` / ``alpha_hat_1`` are the smallest / largest
    such roots (numerical estimates only).  More than one sign change of a
    quantity sets ``ambiguous``.
    """
    alphas = [float(a) for a in alpha_grid]
    if any(not a > 0 for a in alphas):
        raise InvalidParameters("alpha values must be positive")
    C = D3.with_volume(V).C

    def row(alpha):
        d3 = classify(Gaussian(alpha), D3.with_volume(V), cfg=cfg)
        d3s = classify(Gaussian(alpha), D3STAR.with_volume(V), cfg=cfg)
        q = _d3_quantities(alpha, V, cfg)
        return {
            "alpha": alpha,
            "beta": C * alpha,
            "d3": d3.classification,
            "d3star": d3s.classification,
            **{f"sign_{k}": int(np.sign(q[k])) for k in QUANTITIES},
            **{k: q[k] for k in QUANTITIES},
        }

    rows = parallel_map(row, alphas)
    roots = {}
    ambiguous = False
    for k in QUANTITIES:
        found = []
        for r0, r1 in zip(rows, rows[1:]):
            if r0[f"sign_{k}"] * r1[f"sign_{k}"] < 0:
                a, b = r0["alpha"], r1["alpha"]
                if refine:
                    fn = lambda al, k=k: _d3_quantities(al, V, cfg)[k]  # noqa: E731
                    a, b = bisect(fn, a, b, xtol=1e-6 * b)
                found.append(0.5 * (a + b))
        roots[k] = found
        ambiguous |= len(found) > 1
    flat = [x for v in roots.values() for x in v]
    return {
        "volume": V,
        "rows": rows,
        "sign_changes": roots,
        "alpha_hat_0": min(flat) if flat else None,
        "alpha_hat_1": max(flat) if flat else None,
        "ambiguous": ambiguous,
        "note": "alpha_hat values are DERIVED numerical estimates",
    }


def _d3_quantities(alpha: float, V: float, cfg) -> dict:
    """The five D3 sign quantities from the general Hessian at volume ``V``."""
    H = hessian(Gaussian(alpha), D3.with_volume(V), cfg).matrix
    beta = D3.with_volume(V).C * alpha
    return {
        "q_uu": 2 * H[0, 0] / beta,
        "q_xx": 3 * H[2, 2] / beta,
        "q_zz": 3 * H[4, 4] / (2 * beta),
        "det_uv": H[0, 0] * H[1, 1] - H[0, 1] ** 2,
        "det_xy": H[2, 2] * H[3, 3] - H[2, 3] ** 2,
    }
