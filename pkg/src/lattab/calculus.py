"""Energy, analytic gradient and Hessian in the moduli ``(u, v, x, y, z)``.

The general routes differentiate ``E(G(theta)) = sum f(k^T G k)`` through
the Gram derivatives.  The closed forms at Z^3 and D3 use different sums
(1-D theta products, R-shell series, cubic-lattice jets) so that comparing
the two is a real check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from lattab.errors import InvalidParameters, NotConvergent
from lattab.lattice import CBRT2, D3, PARAM_NAMES, Z3, LatticeParams, gram, gram_derivatives
from lattab.potentials import Gaussian, InversePower, LennardJones, Potential
from lattab.special import gaussian_shell_cutoff, theta3_all
from lattab.sums import R_FORM, R_MATRIX, T_FORM, SumConfig, SumResult, Jet, Weight, quadratic, r_shell_sum, radial_jet

_T_A = quadratic(mn=1)
_T_B = quadratic(mn=1, mp=1, np=1, pp=1)


@dataclass(frozen=True)
class Gradient5:
    d_u: float
    d_v: float
    d_x: float
    d_y: float
    d_z: float
    est_error: float = 0.0

    @classmethod
    def from_array(cls, g, est_error=0.0) -> "Gradient5":
        return cls(*(float(v) for v in g), est_error=est_error)

    def as_array(self) -> np.ndarray:
        return np.array([self.d_u, self.d_v, self.d_x, self.d_y, self.d_z])

    def norm_inf(self) -> float:
        return float(np.max(np.abs(self.as_array())))

    def to_dict(self) -> dict:
        out = {f"d_{n}": float(v) for n, v in zip(PARAM_NAMES, self.as_array())}
        out["est_error"] = self.est_error
        return out


@dataclass(frozen=True)
class Hessian5:
    """Symmetric 5x5 Hessian indexed by ``(u, v, x, y, z)``."""

    matrix: np.ndarray
    est_error: float = 0.0

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (5, 5):
            raise InvalidParameters("Hessian5 needs a 5x5 matrix")
        m = 0.5 * (m + m.T)
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    def __getitem__(self, key) -> float:
        if isinstance(key, str):
            i, j = (PARAM_NAMES.index(c) for c in key)
            return float(self.matrix[i, j])
        return self.matrix[key]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def to_dict(self) -> dict:
        return {
            "labels": list(PARAM_NAMES),
            "rows": [[float(v) for v in row] for row in self.matrix],
            "est_error": self.est_error,
        }


def _cfg(cfg):
    return cfg or SumConfig()


def energy_jet(pot: Potential, params: LatticeParams, cfg: SumConfig | None = None, order: int = 2) -> Jet:
    """Value, gradient and (for ``order=2``) Hessian in one pass over the lattice."""
    dG, d2G = gram_derivatives(params)
    return radial_jet(pot, gram(params), dG, d2G if order >= 2 else None, _cfg(cfg), order=order, fixed_volume=True)


def energy(pot: Potential, params: LatticeParams, cfg: SumConfig | None = None) -> SumResult:
    """``E_f[L] = sum_{p in L \\ 0} f(|p|^2)``."""
    j = radial_jet(pot, gram(params), cfg=_cfg(cfg))
    return SumResult(j.value, j.est_error, j.points_used, j.converged)


def gradient(pot: Potential, params: LatticeParams, cfg: SumConfig | None = None) -> Gradient5:
    j = energy_jet(pot, params, cfg, order=1)
    return Gradient5.from_array(j.grad, j.est_error)


def hessian(pot: Potential, params: LatticeParams, cfg: SumConfig | None = None) -> Hessian5:
    """Full analytic Hessian, including entries that vanish by symmetry."""
    j = energy_jet(pot, params, cfg, order=2)
    return Hessian5(j.hess, j.est_error)


# --------------------------------------------------------------------------
# finite-difference oracles


def _fd_energy(pot, params, cfg):
    tight = _cfg(cfg).tightened(1000.0, pot)
    return lambda th: radial_jet(pot, gram(LatticeParams(*th, V=params.V)), cfg=tight).value


def fd_gradient(pot: Potential, params: LatticeParams, h: float = 1e-5, cfg: SumConfig | None = None) -> np.ndarray:
    E = _fd_energy(pot, params, cfg)
    th = np.array(params.moduli)
    eye = np.eye(5) * h
    return np.array([(E(th + eye[i]) - E(th - eye[i])) / (2 * h) for i in range(5)])


def fd_hessian(pot: Potential, params: LatticeParams, h: float = 1e-4, cfg: SumConfig | None = None) -> np.ndarray:
    E = _fd_energy(pot, params, cfg)
    th = np.array(params.moduli)
    eye = np.eye(5) * h
    e0 = E(th)
    H = np.empty((5, 5))
    for i in range(5):
        H[i, i] = (E(th + eye[i]) - 2 * e0 + E(th - eye[i])) / h**2
        for j in range(i):
            H[i, j] = H[j, i] = (
                E(th + eye[i] + eye[j]) - E(th + eye[i] - eye[j]) - E(th - eye[i] + eye[j]) + E(th - eye[i] - eye[j])
            ) / (4 * h * h)
    return H


# --------------------------------------------------------------------------
# closed form at D3


def d3_shell_sums(pot: Potential, V: float, cfg: SumConfig | None = None) -> tuple[float, float, float]:
    """``(sum R^2 f''(CR), sum R f'(CR), sum T f''(CR))`` at volume ``V``."""
    C = D3.with_volume(V).C
    total = np.zeros(3)
    for coef, comp in pot.components():
        if isinstance(comp, Gaussian):
            a = comp.alpha
            t_max = gaussian_shell_cutoff(a * C, _cfg(cfg).t_max)
            f1 = lambda r: -a * np.exp(-a * C * r)  # noqa: E731
            f2 = lambda r: a * a * np.exp(-a * C * r)  # noqa: E731
            part = (
                r_shell_sum(f2, R_FORM * R_FORM, t_max),
                r_shell_sum(f1, R_FORM, t_max),
                r_shell_sum(f2, T_FORM, t_max),
            )
        elif isinstance(comp, InversePower):
            s = comp.s
            j = radial_jet(comp, R_MATRIX, np.array([_T_A, _T_B]), None, _cfg(cfg))
            Z, J = j.value, j.hess[0, 1]  # sum R^-s and s(s+1) sum T R^-(s+2)
            part = (s * (s + 1) * C ** (-s - 2) * Z, -s * C ** (-s - 1) * Z, C ** (-s - 2) * J)
        else:
            raise InvalidParameters(f"unsupported component {comp!r}")
        total += coef * np.array(part)
    return tuple(float(v) for v in total)


def hessian_d3_closed(pot: Potential, V: float = 1.0, cfg: SumConfig | None = None) -> Hessian5:
    """Hessian at D3 assembled from the three R/T shell sums."""
    C = D3.with_volume(V).C
    S1, S2, S3 = d3_shell_sums(pot, V, cfg)
    C2 = C * C
    uu = C2 / 2 * S1 + 2 * C * S2 + 6 * C2 * S3
    vv = 5 / 6 * C2 * S1 + 8 / 3 * C * S2 + 14 / 3 * C2 * S3
    xx = C2 / 3 * S1 + C * S2 + 4 / 3 * C2 * S3
    yy = 2 / 3 * C2 * S1 + 4 / 3 * C * S2 - 8 / 3 * C2 * S3
    uv = -uu
    xy = -C2 / 3 * S1 - 2 * C / 3 * S2 + 4 * C2 / 3 * S3
    H = np.zeros((5, 5))
    H[0, 0], H[1, 1], H[2, 2], H[3, 3], H[4, 4] = uu, vv, xx, yy, yy
    H[0, 1] = H[1, 0] = uv
    H[2, 3] = H[3, 2] = xy
    return Hessian5(H)


# --------------------------------------------------------------------------
# closed form at Z^3


def z3_cubic_sums(pot: Potential, V: float, cfg: SumConfig | None = None) -> tuple[float, float, float]:
    """``(sum (p^4 - p^2 n^2) f''(cI), sum p^2 f'(cI), sum n^2 p^2 f''(cI))`` with ``c = V^(2/3)``.

    ``I = m^2 + n^2 + p^2``.  Gaussians use products of 1-D theta sums,
    power laws an accelerated jet of the cubic lattice along ``p^2`` and ``n^2``.
    """
    c = V ** (2.0 / 3.0)
    total = np.zeros(3)
    P = np.diag([0.0, 0.0, 1.0])
    N = np.diag([0.0, 1.0, 0.0])
    for coef, comp in pot.components():
        if isinstance(comp, Gaussian):
            a = comp.alpha
            t = theta3_all(a * c / math.pi)
            th0 = t.th
            th1 = -t.th1 / math.pi  # sum k^2 e^{-a c k^2}
            th2 = t.th2 / math.pi**2  # sum k^4 e^{-a c k^2}
            part = (
                a * a * (th2 * th0 * th0 - th1 * th1 * th0),
                -a * th1 * th0 * th0,
                a * a * th1 * th1 * th0,
            )
        elif isinstance(comp, InversePower):
            j = radial_jet(comp, c * np.eye(3), np.array([P, N]), None, _cfg(cfg))
            part = (j.hess[0, 0] - j.hess[0, 1], j.grad[0], j.hess[0, 1])
        else:
            raise InvalidParameters(f"unsupported component {comp!r}")
        total += coef * np.array(part)
    return tuple(float(v) for v in total)


def hessian_z3_closed(pot: Potential, V: float = 1.0, cfg: SumConfig | None = None) -> Hessian5:
    """Hessian at Z^3 from the three cubic sums.

    Uses the coefficients that follow from the general second-derivative
    formulas: the ``f'`` term of ``uu`` is ``3C`` and the ``f''`` term of
    ``uv`` is ``-3C^2``.
    """
    C = Z3.with_volume(V).C
    Sa, Sb, Sc = z3_cubic_sums(pot, V, cfg)
    C2 = C * C
    uu = 3 / CBRT2 * C2 * Sa + 3 * C * Sb
    vv = 2 ** (7 / 3) * C2 * Sa + 2 ** (8 / 3) * C * Sb
    xx = 2 ** (4 / 3) * C2 * Sc + 2 ** (2 / 3) * C * Sb
    uv = -3 * C2 * Sa - 3 * CBRT2 * C * Sb
    H = np.diag([uu, vv, xx, xx, xx])
    H[0, 1] = H[1, 0] = uv
    return Hessian5(H)


def lj_h_values(x: float, variant: str = "printed", axes: tuple[int, int] = (2, 1), cfg: SumConfig | None = None):
    """The four cubic-lattice combinations ``h1..h4`` at exponent ``x``.

    ``variant="printed"`` reproduces the published combinations;
    ``"corrected"`` uses ``h1 = 3(x+1)Sa - 3Sb`` and ``h4 = -3(x+1)Sa + 3Sb``,
    which agree with the general Hessian.  ``axes`` picks the coordinates
    playing the roles of ``p`` and ``n`` (any choice gives the same values).
    """
    if not x > 1.5:
        raise NotConvergent("the h sums need x > 3/2")
    if variant not in ("printed", "corrected"):
        raise InvalidParameters(f"unknown variant {variant!r}")
    P = np.zeros((3, 3))
    P[axes[0], axes[0]] = 1.0
    N = np.zeros((3, 3))
    N[axes[1], axes[1]] = 1.0
    j = radial_jet(InversePower(x), np.eye(3), np.array([P, N]), None, _cfg(cfg))
    pp, pn = j.hess[0, 0] / (x * (x + 1)), j.hess[0, 1] / (x * (x + 1))
    Sa = pp - pn  # sum (p^4 - p^2 n^2) / I^(x+2)
    Sc = pn  # sum n^2 p^2 / I^(x+2)
    Sb = -j.grad[0] / x  # sum p^2 / I^(x+1)
    h2 = (x + 1) * Sa - Sb
    h3 = 2 * (x + 1) * Sc - Sb
    if variant == "printed":
        h1 = 3 * (x + 1) * Sa - 4 * Sb
        h4 = -2 * Sa + 3 * Sb
    else:
        h1 = 3 * (x + 1) * Sa - 3 * Sb
        h4 = -3 * (x + 1) * Sa + 3 * Sb
    return float(h1), float(h2), float(h3), float(h4)


def z3_lj_entries(pot: LennardJones, V: float, variant: str = "printed", cfg: SumConfig | None = None) -> dict:
    """``uu, vv, xx, uv`` at Z^3 assembled from ``h1..h4``."""
    C = Z3.with_volume(V).C
    out = {"uu": 0.0, "vv": 0.0, "xx": 0.0, "uv": 0.0}
    for (a, x), sign in (((pot.a2, pot.x2), 1.0), ((pot.a1, pot.x1), -1.0)):
        h1, h2, h3, h4 = lj_h_values(x, variant, cfg=cfg)
        k = sign * a * x / C**x
        out["uu"] += k * 2 ** ((x + 1) / 3) * h1
        out["vv"] += k * 2 ** (3 + x / 3) * h2
        out["xx"] += k * 2 ** (1 + x / 3) * h3
        out["uv"] += k * 2 ** ((x + 2) / 3) * h4
    return out


# --------------------------------------------------------------------------
# automorph identities of R


def _pair(a, b) -> np.ndarray:
    """Matrix of the quadratic form ``(a . k)(b . k)``."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    return 0.5 * (np.outer(a, b) + np.outer(b, a))


_M, _N, _P = (1, 0, 0), (0, 1, 0), (0, 0, 1)
_A2 = (2, 0, 1)  # 2m + p
_B2 = (0, 2, 1)  # 2n + p


def _w(*mats, label="") -> Weight:
    return Weight([(1.0, mats)], label)


_Q4 = quadratic(nn=4, np=4, pp=-1)
_RR = R_FORM * R_FORM


def _rt(a: float, b: float) -> Weight:
    return a * _RR + b * T_FORM


AUTOMORPH_IDENTITIES = {
    "aut1": (_w(_Q4, label="4n^2+4np-p^2"), None),
    "aut2": (_w(_pair(_N, _A2), label="n(2m+p)"), None),
    "aut3": (_w(_pair(_P, _A2), label="p(2m+p)"), None),
    "aut4": (_w(_pair(_P, _B2), label="p(2n+p)"), None),
    "aut5": (_w(_pair(_P, _P), label="p^2"), (2 / 3) * R_FORM),
    "aut6": (_w(_Q4, _Q4, label="(4n^2+4np-p^2)^2"), _rt(10 / 3, 56 / 3)),
    "aut7": (_w(_pair(_N, _N), label="n^2"), 0.5 * R_FORM),
    "aut8": (_w(_pair(_N, _N), _pair(_A2, _A2), label="n^2(2m+p)^2"), _rt(1 / 3, 4 / 3)),
    "aut9": (_w(_pair(_P, _P), _pair(_A2, _A2), label="p^2(2m+p)^2"), _rt(2 / 3, -8 / 3)),
    "aut10": (_w(_pair(_P, _P), _pair(_B2, _B2), label="p^2(2n+p)^2"), _rt(2 / 3, -8 / 3)),
    "aut11": (_w(_pair(_N, _A2), _Q4, label="n(2m+p)(4n^2+4np-p^2)"), None),
    "aut12": (_w(_pair(_P, _A2), _Q4, label="p(2m+p)(4n^2+4np-p^2)"), None),
    "aut13": (_w(_pair(_P, _B2), _Q4, label="p(2n+p)(4n^2+4np-p^2)"), None),
    "aut14": (_w(_pair(_N, _P), label="np"), (-1 / 3) * R_FORM),
    "aut15": (_w(_pair(_N, _P), _pair(_A2, _A2), label="np(2m+p)^2"), _rt(-1 / 3, 4 / 3)),
    "aut16": (_w(_pair(_N, _P), _pair(_A2, _B2), label="np(2m+p)(2n+p)"), None),
    "aut17": (_w(_pair(_P, _P), _pair(_A2, _B2), label="p^2(2m+p)(2n+p)"), None),
    "aut18": (_w(_pair(_P, _P), _pair(_P, _P), label="p^4"), _rt(2 / 3, 8 / 3)),
    "aut19": (_w(_pair(_P, _P), _Q4, label="p^2(4n^2+4np-p^2)"), _rt(-2 / 3, -8)),
}
# As printed, the fourth identity reads sum n(2n+p) F(R) = 0; it is false.
AUT4_PRINTED = (_w(_pair(_N, _B2), label="n(2n+p)"), None)


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    lhs_weight: str
    lhs: float
    rhs: float
    residual: float
    relative: bool
    passed: bool

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "weight": self.lhs_weight,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "residual": self.residual,
            "relative": self.relative,
            "passed": self.passed,
        }


def check_identity(name: str, lhs_w: Weight, rhs_w: Weight | None, F, t_max: int,
                   rel_tol: float = 1e-10, abs_tol: float = 1e-12) -> IdentityCheck:
    """Compare ``sum lhs_w F(R)`` with ``sum rhs_w F(R)`` over ``1 <= R <= t_max``.

    A missing right-hand side means the identity says zero; it is judged on
    the absolute residual, the others on the relative one.
    """
    lhs = r_shell_sum(F, lhs_w, t_max)
    rhs = 0.0 if rhs_w is None else r_shell_sum(F, rhs_w, t_max)
    if rhs_w is None:
        res = abs(lhs)
        ok = res < abs_tol
    else:
        res = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)
        ok = res < rel_tol
    return IdentityCheck(name, lhs_w.label, float(lhs), float(rhs), float(res), rhs_w is not None, bool(ok))


def automorph_checks(beta: float, t_max: int = 40, printed_aut4: bool = False) -> list[IdentityCheck]:
    """All nineteen R-automorph identities with ``F(R) = exp(-beta R)``."""
    if not beta > 0:
        raise InvalidParameters("beta must be positive")
    F = lambda R: np.exp(-beta * R)  # noqa: E731
    out = []
    for name, (lw, rw) in AUTOMORPH_IDENTITIES.items():
        if name == "aut4" and printed_aut4:
            lw, rw = AUT4_PRINTED
        out.append(check_identity(name, lw, rw, F, t_max))
    return out
