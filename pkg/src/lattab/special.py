"""Jacobi theta, lattice theta, Epstein zeta and the FCC series Y, G, H."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from lattab import _backend
from lattab.errors import InvalidParameters, NonPositiveArgument, NotConvergent, PoleAt3Halves
from lattab.lattice import D3, LatticeParams, gram
from lattab.potentials import Gaussian, InversePower
from lattab.sums import (
    R_MATRIX,
    R_FORM,
    T_FORM,
    SumConfig,
    SumResult,
    Weight,
    quadratic,
    radial_jet,
    r_shell_sum,
    shell_totals,
    cumulative_T,
    upper_gamma,
)

# --------------------------------------------------------------------------
# one-dimensional theta


@dataclass(frozen=True)
class Theta1DValue:
    s: float
    th: float
    th1: float
    th2: float


def _theta3_direct(s: float) -> tuple[float, float, float]:
    K = math.ceil(math.sqrt(40.0 / (math.pi * s))) + 2
    k2 = np.arange(1, K + 1, dtype=float) ** 2
    e = np.exp(-math.pi * k2 * s)
    th = 1.0 + 2.0 * math.fsum(e)
    th1 = -2.0 * math.pi * math.fsum(k2 * e)
    th2 = 2.0 * math.pi**2 * math.fsum(k2 * k2 * e)
    return th, th1, th2


def theta3_all(s: float) -> Theta1DValue:
    """``theta_3(s) = sum_k exp(-pi k^2 s)`` and its first two derivatives."""
    if not s > 0:
        raise NonPositiveArgument(f"theta3 needs s > 0, got {s}")
    if s >= 1.0:
        return Theta1DValue(s, *_theta3_direct(s))
    # modular relation theta(s) = s^(-1/2) theta(1/s), differentiated twice
    T0, T1, T2 = _theta3_direct(1.0 / s)
    th = s**-0.5 * T0
    th1 = -0.5 * s**-1.5 * T0 - s**-2.5 * T1
    th2 = 0.75 * s**-2.5 * T0 + 3.0 * s**-3.5 * T1 + s**-4.5 * T2
    return Theta1DValue(s, th, th1, th2)


def theta3(s: float, order: int = 0) -> float:
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    v = theta3_all(s)
    return (v.th, v.th1, v.th2)[order]


def fs1_residual(s: float) -> float:
    """``s th'(s)/th(s) + (1/s) th'(1/s)/th(1/s) + 1/2``, identically zero."""
    a, b = theta3_all(s), theta3_all(1.0 / s)
    return s * a.th1 / a.th + (1.0 / s) * b.th1 / b.th + 0.5


def log_convexity_terms(s: float) -> tuple[float, float]:
    """``(th'' th - th'^2, -th' th / s)``; the refined inequality is ``first > second > 0``."""
    v = theta3_all(s)
    return v.th2 * v.th - v.th1**2, -v.th1 * v.th / s


# --------------------------------------------------------------------------
# lattice theta and Epstein zeta


def theta_lattice(params: LatticeParams, alpha: float, cfg: SumConfig | None = None, branch: str = "auto") -> float:
    """``theta_L(alpha) = sum_{p in L} exp(-alpha |p|^2)``.

    ``branch`` is ``auto`` (crossover at ``alpha = pi V^(-2/3)``), ``direct`` or ``dual``.
    """
    if not alpha > 0:
        raise NonPositiveArgument("alpha must be positive")
    cfg = cfg or SumConfig()
    G = gram(params)
    if branch == "auto":
        return 1.0 + radial_jet(Gaussian(alpha), G, cfg=cfg).value
    direct_cfg = SumConfig(cfg.target_tol, "direct", cfg.cutoff_growth, cfg.t_max, cfg.max_points)
    if branch == "direct":
        return 1.0 + radial_jet(Gaussian(alpha), G, cfg=direct_cfg).value
    if branch == "dual":
        beta = math.pi**2 / alpha
        inner = radial_jet(Gaussian(beta), np.linalg.inv(G), cfg=direct_cfg).value
        return (math.pi / alpha) ** 1.5 / params.V * (1.0 + inner)
    raise InvalidParameters(f"unknown branch {branch!r}")


def epstein_zeta(params: LatticeParams, two_s: float, backend: str = "gamma", cfg: SumConfig | None = None) -> SumResult:
    """``zeta_L(2s) = sum_{p != 0} |p|^(-2s)``.

    ``backend="gamma"`` continues analytically to every ``s != 3/2``;
    ``backend="direct"`` needs ``s > 3/2``.
    """
    s = 0.5 * two_s
    if backend not in ("gamma", "direct"):
        raise InvalidParameters(f"unknown backend {backend!r}")
    if s == 0:
        return SumResult(-1.0, 0.0, 0, True)
    cfg = cfg or SumConfig()
    strategy = "gamma" if backend == "gamma" else "direct"
    cfg = SumConfig(cfg.target_tol, strategy, cfg.cutoff_growth, cfg.t_max, cfg.max_points)
    if backend == "gamma" and abs(s - 1.5) < 1e-12:
        raise PoleAt3Halves("zeta_L(2s) has a pole at s = 3/2")
    if s < 0:
        # the power-law machinery needs s > 0; use the completed form
        lam = completed_epstein(params, s)
        return SumResult(lam * math.pi**s / sp.gamma(s), 0.0, 0, True)
    j = radial_jet(InversePower(s), gram(params), cfg=cfg)
    return SumResult(j.value, j.est_error, j.points_used, j.converged)


def completed_epstein(params: LatticeParams, s: float, split: float | None = None, x_max: float = 60.0) -> float:
    """``Lambda_L(s) = pi^(-s) Gamma(s) zeta_L(2s)`` from the incomplete-gamma split.

    Finite wherever ``s`` is not 0 or 3/2, including the poles of ``Gamma``.
    ``split`` is the Mellin split point (default ``V^(-2/3)``); the result
    does not depend on it, which makes it a useful self-check.
    """
    if s == 0 or s == 1.5:
        raise PoleAt3Halves(f"Lambda_L(s) has a pole at s = {s}")
    G = gram(params)
    V = params.V
    lam = V ** (-2.0 / 3.0) if split is None else float(split)
    pts = _backend.ball_points(G, x_max / (math.pi * lam))
    x = math.pi * _backend.quad_values(pts, G)
    direct = _backend.compensated_sum(x ** (-s) * upper_gamma(s, lam * x))
    Gd = np.linalg.inv(G)
    pts_d = _backend.ball_points(Gd, x_max * lam / math.pi)
    xd = math.pi * _backend.quad_values(pts_d, Gd)
    a = 1.5 - s
    dual = _backend.compensated_sum(xd ** (-a) * upper_gamma(a, xd / lam))
    return direct + dual / V + lam ** (s - 1.5) / (V * (s - 1.5)) - lam**s / s


# --------------------------------------------------------------------------
# FCC series


FCC_UNIT = D3.with_volume(2.0**-0.5)  # Gram matrix equals R exactly
_T_A = quadratic(mn=1)
_T_B = quadratic(mn=1, mp=1, np=1, pp=1)


def _r_power_jet(s: float, cfg: SumConfig | None):
    """``sum R^-s`` and ``sum s(s+1) T R^-(s+2)`` from one accelerated jet."""
    D = np.array([_T_A, _T_B])
    j = radial_jet(InversePower(s), R_MATRIX, D, None, cfg or SumConfig(strategy="gamma"))
    return j.value, j.hess[0, 1], j


def zeta_R(s: float, method: str = "gamma", t_max: int = 400, cfg: SumConfig | None = None) -> float:
    """``zeta_{2^(-1/3) D3}(2s) = sum_{(m,n,p) != 0} R(m,n,p)^(-s)``.

    ``method="shells"`` uses the integer shell series with a geometric tail
    extrapolation (needs ``s > 3/2``); ``"gamma"`` is exponentially convergent.
    """
    if method == "gamma":
        if abs(s - 1.5) < 1e-12:
            raise PoleAt3Halves("zeta_R has a pole at s = 3/2")
        return _r_power_jet(s, cfg)[0]
    if method == "shells":
        if not s > 1.5:
            raise NotConvergent("shell series for zeta_R needs s > 3/2")
        return _shell_series(Weight.one(), s, 1.5 - s, t_max)
    raise InvalidParameters(f"unknown method {method!r}")


def _shell_series(weight: Weight, power: float, tail_exp: float, t_max: int) -> float:
    """``sum weight * R^-power`` over shells, extrapolating a tail ``~ t^tail_exp``."""
    W = shell_totals(weight, t_max)
    t = np.arange(t_max + 1, dtype=float)
    terms = np.zeros(t_max + 1)
    terms[1:] = W[1:] * t[1:] ** (-power)
    cuts = [int(round(t_max / 4.0)), int(round(t_max / 2.0)), t_max]
    partial = [math.fsum(terms[: c + 1]) for c in cuts]
    r = 2.0**tail_exp
    extra = r / (1.0 - r)
    lims = [partial[i] + (partial[i] - partial[i - 1]) * extra for i in (1, 2)]
    return lims[1]


def y_function(s: float, method: str = "gamma", t_max: int = 400, cfg: SumConfig | None = None) -> float:
    """``Y(s) = sum T(m,n,p) / R(m,n,p)^(s+2)``.

    Methods: ``gamma`` (accelerated; analytic continuation for ``s <= 3/2``),
    ``shells`` (shell series with tail extrapolation) and ``by-parts`` (the
    truncated series rearranged through ``A(t) = sum_{R <= t} T``).  The
    series itself converges only for ``s > 3/2``.
    """
    if not s > 0:
        raise NonPositiveArgument("Y(s) needs s > 0")
    if method == "gamma":
        if abs(s - 1.5) < 1e-12:
            raise PoleAt3Halves("the accelerated Y(s) evaluation is singular at s = 3/2")
        return _r_power_jet(s, cfg)[1] / (s * (s + 1.0))
    if not s > 1.5 and method in ("shells", "by-parts"):
        # |T| <= R^2/4 and A(t) grows like t^(7/2): the series needs s > 3/2
        raise NotConvergent("the Y(s) series converges only for s > 3/2; use method='gamma'")
    if method == "shells":
        return _shell_series(T_FORM, s + 2.0, 1.5 - s, t_max)
    if method == "by-parts":
        return y_by_parts(s, t_max)
    raise InvalidParameters(f"unknown method {method!r}")


def y_truncated(s: float, t_max: int) -> float:
    """``sum_{R <= t_max} T / R^(s+2)`` accumulated shell by shell."""
    return r_shell_sum(lambda t: t ** (-s - 2.0), T_FORM, t_max)


def y_by_parts(s: float, t_max: int) -> float:
    """Truncated ``Y`` via summation by parts:
    ``sum_{t=2}^{t_max-1} A(t) (t^-(s+2) - (t+1)^-(s+2)) + A(t_max) t_max^-(s+2)``."""
    W = shell_totals(T_FORM, t_max)
    A = np.cumsum(W)
    t = np.arange(t_max + 1, dtype=float)
    w = np.zeros(t_max + 1)
    w[1:t_max] = t[1:t_max] ** (-s - 2.0) - t[2:] ** (-s - 2.0)
    w[t_max] = t_max ** (-s - 2.0)
    return _backend.compensated_dot(A[1:], w[1:])


def g_function(s: float, cfg: SumConfig | None = None) -> float:
    """``G(s) = s(s-3) zeta_R(s) + 12 s(s+1) Y(s)``."""
    z, j, _ = _r_power_jet(s, cfg)
    return s * (s - 3.0) * z + 12.0 * j


def h_function(s: float, cfg: SumConfig | None = None) -> float:
    """``H(s) = s(s-1) zeta_R(s) - 4 s(s+1) Y(s)``."""
    z, j, _ = _r_power_jet(s, cfg)
    return s * (s - 1.0) * z - 4.0 * j


def ghy(s: float, cfg: SumConfig | None = None) -> dict:
    z, j, jet = _r_power_jet(s, cfg)
    return {
        "s": s,
        "G": s * (s - 3.0) * z + 12.0 * j,
        "H": s * (s - 1.0) * z - 4.0 * j,
        "Y": j / (s * (s + 1.0)),
        "zeta_R": z,
        "est_error": jet.est_error,
    }


# --------------------------------------------------------------------------
# Gaussian shell scalars


@dataclass(frozen=True)
class SpectralScalars:
    beta: float
    A1: float
    A2: float
    A3: float
    t_max: int

    def to_dict(self) -> dict:
        return {"beta": self.beta, "A1": self.A1, "A2": self.A2, "A3": self.A3, "t_max": self.t_max}


def gaussian_shell_cutoff(beta: float, t_max: int = 40) -> int:
    """Shell radius after which ``R^2 exp(-beta R)`` terms are negligible in double precision."""
    need = (45.0 + 4.0 * math.log1p(50.0 / beta)) / beta
    return max(int(t_max), int(math.ceil(need)))


def spectral_scalars(beta: float, t_max: int = 40) -> SpectralScalars:
    """``A1 = sum R^2 e^-bR``, ``A2 = sum R e^-bR``, ``A3 = sum T e^-bR`` over shells.

    ``t_max`` is raised automatically when ``beta`` is small.
    """
    if not beta > 0:
        raise NonPositiveArgument("beta must be positive")
    t = gaussian_shell_cutoff(beta, t_max)
    F = lambda r: np.exp(-beta * r)  # noqa: E731
    A1 = r_shell_sum(F, R_FORM * R_FORM, t)
    A2 = r_shell_sum(F, R_FORM, t)
    A3 = r_shell_sum(F, T_FORM, t)
    return SpectralScalars(beta, A1, A2, A3, t)


__all__ = [
    "Theta1DValue",
    "theta3",
    "theta3_all",
    "fs1_residual",
    "log_convexity_terms",
    "theta_lattice",
    "epstein_zeta",
    "completed_epstein",
    "zeta_R",
    "y_function",
    "y_truncated",
    "y_by_parts",
    "g_function",
    "h_function",
    "ghy",
    "SpectralScalars",
    "spectral_scalars",
    "cumulative_T",
]
