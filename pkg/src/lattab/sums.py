"""Error-controlled lattice sums over Z^3 \\ {0}.

Three entry points:

* :func:`lattice_sum` -- ``sum_k w(k) f^(j)(Q_L(k))`` for a polynomial weight.
* :func:`radial_jet` -- value, directional gradient and Hessian of
  ``G -> sum_k f(k^T G k)`` along arbitrary symmetric directions.  Every
  energy derivative in the package is an instance of this.
* :func:`r_shell_sum` -- sums over the FCC form ``R`` grouped by integer
  shells, so that automorph identities hold shell by shell.

Power laws are summed with the incomplete-gamma (Ewald/Terras) split of the
Mellin integral, which converges exponentially on both the lattice and its
dual and continues analytically to ``s <= 3/2``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import integrate, special

from lattab import _backend
from lattab.errors import Budget, InvalidParameters, NotConvergent, PoleAt3Halves
from lattab.lattice import D3, LatticeParams, gram
from lattab.potentials import Gaussian, InversePower, Potential

STRATEGIES = ("auto", "direct", "r-truncated", "gamma")


@dataclass(frozen=True)
class SumConfig:
    """Truncation policy.

    ``target_tol`` is an absolute tolerance; ``None`` means 1e-12 for
    Gaussian summands and 1e-9 for power laws.
    """

    target_tol: float | None = None
    strategy: str = "auto"
    cutoff_growth: float = 2.0 ** (2.0 / 3.0)
    t_max: int = 40
    max_points: int = 20_000_000

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise InvalidParameters(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.target_tol is not None and not self.target_tol > 0:
            raise InvalidParameters("target_tol must be positive")
        if not self.cutoff_growth > 1:
            raise InvalidParameters("cutoff_growth must exceed 1")

    def tol_for(self, pot: Potential | None) -> float:
        if self.target_tol is not None:
            return self.target_tol
        return 1e-12 if isinstance(pot, Gaussian) else 1e-9

    def tightened(self, factor: float = 10.0, pot: Potential | None = None) -> "SumConfig":
        return replace(self, target_tol=self.tol_for(pot) / factor)

    def to_dict(self) -> dict:
        return {
            "target_tol": self.target_tol,
            "strategy": self.strategy,
            "cutoff_growth": self.cutoff_growth,
            "t_max": self.t_max,
            "max_points": self.max_points,
        }


@dataclass(frozen=True)
class SumResult:
    value: float
    est_error: float
    points_used: int
    converged: bool

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "est_error": self.est_error,
            "points_used": self.points_used,
            "converged": self.converged,
        }


# --------------------------------------------------------------------------
# weights


def quadratic(**coeffs) -> np.ndarray:
    """Symmetric matrix of a quadratic form given by monomial coefficients.

    Keys are ``mm, nn, pp, mn, mp, np``; e.g. ``quadratic(nn=4, np=4, pp=-1)``
    is ``4n^2 + 4np - p^2``.
    """
    idx = {"m": 0, "n": 1, "p": 2}
    A = np.zeros((3, 3))
    for key, c in coeffs.items():
        if len(key) != 2 or key[0] not in idx or key[1] not in idx:
            raise InvalidParameters(f"bad monomial {key!r}")
        i, j = idx[key[0]], idx[key[1]]
        if i == j:
            A[i, i] += c
        else:
            A[i, j] += c / 2.0
            A[j, i] += c / 2.0
    return A


class Weight:
    """Homogeneous polynomial weight: a sum of products of quadratic forms.

    ``terms`` is a tuple of ``(coefficient, (A, B, ...))``; each term is
    ``coefficient * prod_i k^T A_i k``.
    """

    def __init__(self, terms, label: str = ""):
        terms = tuple((float(c), tuple(np.asarray(f, dtype=float) for f in fs)) for c, fs in terms)
        degrees = {2 * len(fs) for _, fs in terms}
        if len(degrees) > 1:
            raise InvalidParameters("weight must be homogeneous")
        self.terms = terms
        self.degree = degrees.pop() if degrees else 0
        self.label = label

    @classmethod
    def one(cls) -> "Weight":
        return cls([(1.0, ())], "1")

    @classmethod
    def quad(cls, A, label="") -> "Weight":
        return cls([(1.0, (A,))], label)

    def __call__(self, pts) -> np.ndarray:
        pts = np.asarray(pts)
        out = np.zeros(len(pts))
        for c, fs in self.terms:
            t = np.full(len(pts), c)
            for A in fs:
                t = t * _backend.quad_values(pts, A)
            out = out + t
        return out

    def __mul__(self, other):
        if isinstance(other, Weight):
            terms = [(c1 * c2, f1 + f2) for c1, f1 in self.terms for c2, f2 in other.terms]
            return Weight(terms, f"({self.label})*({other.label})")
        return Weight([(other * c, fs) for c, fs in self.terms], f"{other}*({self.label})")

    __rmul__ = __mul__

    def __add__(self, other: "Weight") -> "Weight":
        return Weight(self.terms + other.terms, f"{self.label} + {other.label}")

    def __neg__(self):
        return -1.0 * self

    def __sub__(self, other):
        return self + (-other)

    def __repr__(self):
        return f"Weight({self.label or len(self.terms)}, degree={self.degree})"


R_MATRIX = quadratic(mm=1, nn=1, pp=1, mp=1, np=1)
I_MATRIX = np.eye(3)
R_FORM = Weight.quad(R_MATRIX, "R")
T_FORM = Weight([(1.0, (quadratic(mn=1), quadratic(mn=1, mp=1, np=1, pp=1)))], "T")


# --------------------------------------------------------------------------
# incomplete gamma for any real order


def upper_gamma(a: float, x):
    """Non-regularised upper incomplete gamma ``Gamma(a, x)`` for real ``a``, ``x > 0``."""
    x = np.asarray(x, dtype=float)
    if a > 0:
        return special.gammaincc(a, x) * special.gamma(a)
    out = np.empty_like(x)
    big = x >= 1.0
    if big.any():
        out[big] = _gamma_cf(a, x[big])
    small = ~big
    if small.any():
        xs = x[small]
        k = int(math.ceil(-a)) if a != math.floor(a) else int(-a)
        b = a + k
        g = special.exp1(xs) if b == 0 else special.gammaincc(b, xs) * special.gamma(b)
        for _ in range(k):
            b -= 1.0
            g = (g - xs**b * np.exp(-xs)) / b
        out[small] = g
    return out


def _gamma_cf(a, x):
    # modified Lentz on the Legendre continued fraction, valid for x >= 1
    tiny = 1e-300
    b = x + 1.0 - a
    c = np.full_like(x, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, 400):
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < tiny, tiny, d)
        c = b + an / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        d = 1.0 / d
        delta = d * c
        h = h * delta
        if np.all(np.abs(delta - 1.0) < 1e-16):
            break
    return np.exp(-x + a * np.log(x)) * h


# --------------------------------------------------------------------------
# radial pieces


@dataclass
class Jet:
    """Value, first and (optionally) second directional derivatives."""

    value: float
    grad: np.ndarray
    hess: np.ndarray | None
    est_error: float = 0.0
    points_used: int = 0
    converged: bool = True

    def __add__(self, other: "Jet") -> "Jet":
        hess = None if self.hess is None or other.hess is None else self.hess + other.hess
        return Jet(
            self.value + other.value,
            self.grad + other.grad,
            hess,
            self.est_error + other.est_error,
            self.points_used + other.points_used,
            self.converged and other.converged,
        )

    def scaled(self, c: float) -> "Jet":
        return Jet(
            c * self.value,
            c * self.grad,
            None if self.hess is None else c * self.hess,
            abs(c) * self.est_error,
            self.points_used,
            self.converged,
        )


@dataclass
class _Radial:
    """``g`` and its derivatives as a vectorised function ``g(q, order)``."""

    func: object
    start: float  # initial cutoff guess, in units of q
    consts: tuple = field(default=(0.0, 0.0))  # (c0 inside rho factor, c1 outside)
    relative: bool = False  # also control the tail relative to the sum itself


def _gauss_radial(alpha, amp=1.0):
    def g(q, order):
        return amp * (-alpha) ** order * np.exp(-alpha * q)

    return _Radial(g, 30.0 / alpha, relative=True)


def _power_direct_radial(s, lam):
    poch = (1.0, s, s * (s + 1.0))

    def g(q, order):
        return (-1.0) ** order * poch[order] * q ** (-s - order) * special.gammaincc(s + order, math.pi * lam * q)

    return _Radial(g, 20.0 / (math.pi * lam))


def _power_dual_radial(s, lam):
    pref = math.exp(s * math.log(math.pi) - special.gammaln(s))

    def h(q, order):
        a = 1.5 - s + order
        return pref * (-math.pi) ** order * (math.pi * q) ** (-a) * upper_gamma(a, math.pi * q / lam)

    c0 = pref * lam ** (s - 1.5) / (s - 1.5)
    c1 = -pref * lam**s / s
    return _Radial(h, 20.0 * lam / math.pi, (c0, c1))


def _pure_power_radial(s):
    poch = (1.0, s, s * (s + 1.0))

    def g(q, order):
        return (-1.0) ** order * poch[order] * q ** (-s - order)

    return _Radial(g, 1.0)


def _form_norm(D, G) -> float:
    """max |k^T D k| / k^T G k over real k."""
    if D is None or len(D) == 0:
        return 0.0
    from scipy.linalg import eigvalsh

    return max(float(np.abs(eigvalsh(Di, G)).max()) for Di in np.reshape(D, (-1, 3, 3)))


def _tail_bound(G, radial: _Radial, cutoff: float, w1: float, w2: float, order: int) -> float:
    """Bound on the discarded part ``sum_{Q > cutoff}`` from a shell-density integral."""
    sqdet = math.sqrt(np.linalg.det(G))
    delta = 0.5 * math.sqrt(float(np.trace(G)))

    def dens(q):
        r = math.sqrt(q)
        return 2.0 * math.pi * (r + delta) ** 2 / (r * sqdet)

    def env(q):
        qa = np.array([q])
        e = abs(radial.func(qa, 0)[0])
        if order >= 1:
            g1 = abs(radial.func(qa, 1)[0])
            e = max(e, g1 * w1 * q)
            if order >= 2:
                e = max(e, abs(radial.func(qa, 2)[0]) * (w1 * q) ** 2 + g1 * w2 * q)
        return dens(q) * e

    val, _ = integrate.quad(env, cutoff, np.inf, limit=200)
    return 2.0 * val


def _points_estimate(G, cutoff):
    delta = 0.5 * math.sqrt(float(np.trace(G)))
    return 4.0 / 3.0 * math.pi * (math.sqrt(cutoff) + delta) ** 3 / math.sqrt(np.linalg.det(G))


def _choose_cutoff(G, radial, tol, w1, w2, order, max_points):
    target = 0.5 * tol
    if radial.relative:
        # exponentially small sums still need full relative precision
        q0 = float(np.min(np.diag(G)))
        target = min(target, 1e-17 * _tail_bound(G, radial, q0, w1, w2, order))
    cutoff = radial.start
    for _ in range(400):
        if _tail_bound(G, radial, cutoff, w1, w2, order) <= target:
            break
        cutoff *= 1.2
    est = _tail_bound(G, radial, cutoff, w1, w2, order)
    if _points_estimate(G, cutoff) > max_points:
        raise Budget(f"cutoff {cutoff:.4g} needs more than max_points={max_points} points")
    return cutoff, est


def _piece_sums(G, D, D2, radial, cutoff, order):
    pts = _backend.ball_points(G, cutoff)
    q = _backend.quad_values(pts, G)
    s0 = _backend.compensated_sum(radial.func(q, 0))
    nd = len(D)
    s1 = np.zeros(nd)
    s2 = None if order < 2 else np.zeros((nd, nd))
    if nd and order >= 1:
        g1 = radial.func(q, 1)
        g2 = radial.func(q, 2) if order >= 2 else None
        s1, s2 = _backend.jet_sums(pts, D, D2 if order >= 2 else None, g1, g2)
    return s0, s1, s2, len(pts)


def _direct_piece(G, D, D2, radial, tol, order, max_points) -> Jet:
    w1, w2 = _form_norm(D, G), _form_norm(D2, G)
    cutoff, est = _choose_cutoff(G, radial, tol, w1, w2, order, max_points)
    s0, s1, s2, n = _piece_sums(G, D, D2, radial, cutoff, order)
    return Jet(s0, s1, s2, est, n, est <= tol)


def _dual_piece(G, D, D2, radial, tol, order, max_points, fixed_volume=False) -> Jet:
    """``rho(G) * (sum_k h(k^T G^-1 k) + c0) + c1`` with ``rho = det(G)^(-1/2)``.

    With ``fixed_volume`` the directions preserve ``det G`` and the ``rho``
    derivatives are dropped exactly instead of being evaluated as rounding noise.
    """
    nd = len(D)
    M = np.linalg.inv(G)
    M = 0.5 * (M + M.T)
    E = np.array([-M @ Di @ M for Di in D]).reshape(nd, 3, 3)
    E2 = None
    if order >= 2:
        E2 = np.empty((nd, nd, 3, 3))
        for i in range(nd):
            for j in range(nd):
                E2[i, j] = M @ D[i] @ M @ D[j] @ M + M @ D[j] @ M @ D[i] @ M - M @ D2[i, j] @ M
    inner = _direct_piece(M, E, E2, radial, tol, order, max_points)
    c0, c1 = radial.consts
    rho = 1.0 / math.sqrt(np.linalg.det(G))
    S = inner.value + c0
    tr = np.zeros(nd) if fixed_volume else np.array([np.trace(M @ Di) for Di in D])
    rho1 = -0.5 * rho * tr
    grad = rho1 * S + rho * inner.grad
    hess = None
    if order >= 2:
        rho2 = np.zeros((nd, nd))
        for i in range(0 if fixed_volume else nd):
            for j in range(nd):
                rho2[i, j] = rho * (
                    0.25 * tr[i] * tr[j] + 0.5 * np.trace(M @ D[i] @ M @ D[j]) - 0.5 * np.trace(M @ D2[i, j])
                )
        hess = rho2 * S + np.outer(rho1, inner.grad) + np.outer(inner.grad, rho1) + rho * inner.hess
    return Jet(rho * S + c1, grad, hess, rho * inner.est_error, inner.points_used, inner.converged)


def split_parameter(G) -> float:
    """Mellin split point ``lambda = V^(-2/3)`` used for power laws."""
    return float(np.linalg.det(G)) ** (-1.0 / 3.0)


def _growth_loop(evaluate, G, ratio, cfg, tol):
    """Grow the cutoff geometrically and extrapolate the algebraic tail.

    ``evaluate(cutoff)`` returns ``(flat_values, points)``.  Each step's
    extrapolated limit is ``S_k + (S_k - S_{k-1}) r/(1 - r)``; the error
    estimate is twice the larger of the last two changes in that limit.
    """
    cutoff = max(4.0 * float(np.max(np.diag(G))), (3000 * math.sqrt(np.linalg.det(G))) ** (2.0 / 3.0))
    extra = ratio / (1.0 - ratio)
    raw_prev = None
    limits: list[np.ndarray] = []
    est, n = math.inf, 0
    while True:
        if _points_estimate(G, cutoff) > cfg.max_points:
            if not limits:
                raise Budget(f"max_points={cfg.max_points} too small for this sum")
            partial = SumResult(float(limits[-1].flat[0]), est, n, False)
            raise Budget(f"not converged within {cfg.max_points} points", partial=partial)
        raw, n = evaluate(cutoff)
        if raw_prev is not None:
            limits.append(raw + (raw - raw_prev) * extra)
            if len(limits) >= 3:
                changes = [np.max(np.abs(limits[-i] - limits[-i - 1]), initial=0.0) for i in (1, 2)]
                est = 2.0 * float(max(changes))
                if est <= tol:
                    return limits[-1], est, n
        raw_prev = raw
        cutoff *= cfg.cutoff_growth


def _power_growth(G, D, D2, s, tol, order, cfg) -> Jet:
    """Plain truncated power-law sum with geometric tail extrapolation."""
    if not s > 1.5:
        raise NotConvergent(f"direct summation of r^-{s} needs s > 3/2; use the gamma strategy")
    radial = _pure_power_radial(s)
    nd = len(D)

    def evaluate(cutoff):
        s0, s1, s2, n = _piece_sums(G, D, D2, radial, cutoff, order)
        parts = [np.atleast_1d(s0), s1] + ([s2.ravel()] if s2 is not None else [])
        return np.concatenate(parts), n

    ratio = cfg.cutoff_growth ** ((3.0 - 2.0 * s) / 2.0)
    flat, est, n = _growth_loop(evaluate, G, ratio, cfg, tol)
    hess = flat[1 + nd:].reshape(nd, nd) if order >= 2 else None
    return Jet(float(flat[0]), flat[1:1 + nd], hess, est, n, True)


def _component_jet(pot, G, D, D2, cfg, tol, order, fixed_volume=False) -> Jet:
    strategy = cfg.strategy
    if strategy == "r-truncated":
        raise InvalidParameters("r-truncated applies to FCC shell sums only (see lattice_sum)")
    if isinstance(pot, Gaussian):
        V = math.sqrt(np.linalg.det(G))
        use_dual = strategy != "direct" and pot.alpha < math.pi * V ** (-2.0 / 3.0)
        if use_dual:
            amp = (math.pi / pot.alpha) ** 1.5
            radial = _gauss_radial(math.pi**2 / pot.alpha, amp)
            radial.consts = (amp, -1.0)
            return _dual_piece(G, D, D2, radial, tol, order, cfg.max_points, fixed_volume)
        return _direct_piece(G, D, D2, _gauss_radial(pot.alpha), tol, order, cfg.max_points)
    if isinstance(pot, InversePower):
        s = pot.s
        if strategy == "direct":
            return _power_growth(G, D, D2, s, tol, order, cfg)
        if abs(s - 1.5) < 1e-12:
            raise PoleAt3Halves("the Epstein zeta function has a pole at s = 3/2")
        lam = split_parameter(G)
        direct = _direct_piece(G, D, D2, _power_direct_radial(s, lam), 0.5 * tol, order, cfg.max_points)
        direct.value += _power_dual_radial(s, lam).consts[1]
        dual_radial = _power_dual_radial(s, lam)
        dual_radial.consts = (dual_radial.consts[0], 0.0)
        return direct + _dual_piece(G, D, D2, dual_radial, 0.5 * tol, order, cfg.max_points, fixed_volume)
    raise InvalidParameters(f"unsupported potential {pot!r}")


def radial_jet(
    pot: Potential,
    G,
    D=None,
    D2=None,
    cfg: SumConfig | None = None,
    order: int | None = None,
    fixed_volume: bool = False,
) -> Jet:
    """Derivatives of ``G -> sum_{k != 0} f(k^T G k)`` along symmetric directions.

    Args:
        pot: potential ``f`` (acting on squared lengths).
        G: 3x3 Gram matrix.
        D: ``(nd, 3, 3)`` first-order directions ``dG/dt_i``.
        D2: ``(nd, nd, 3, 3)`` second derivatives ``d^2 G/dt_i dt_j``; zero if omitted.
        cfg: summation policy.
        order: 0 (value), 1 (plus gradient) or 2 (plus Hessian); defaults to
            2 when ``D`` is given.
        fixed_volume: assert that the directions keep ``det G`` constant
            (true for the moduli at fixed ``V``).

    Returns:
        :class:`Jet` with ``grad[i] = sum f'(Q) k^T D_i k`` and
        ``hess[i, j] = sum f''(Q) (k^T D_i k)(k^T D_j k) + f'(Q) k^T D2_ij k``.
    """
    cfg = cfg or SumConfig()
    G = np.asarray(G, dtype=float)
    D = np.zeros((0, 3, 3)) if D is None else np.asarray(D, dtype=float).reshape(-1, 3, 3)
    nd = len(D)
    if order is None:
        order = 2 if nd else 0
    if order >= 2 and D2 is None:
        D2 = np.zeros((nd, nd, 3, 3))
    tol = cfg.tol_for(pot)
    comps = pot.components()
    total = None
    for coef, comp in comps:
        j = _component_jet(comp, G, D, D2, cfg, tol / (len(comps) * abs(coef)), order, fixed_volume).scaled(coef)
        total = j if total is None else total + j
    return total


# --------------------------------------------------------------------------
# generic weighted sums


def _weight_directions(weight: Weight, order: int):
    """Express ``weight * f^(order)`` through jet directions, if possible."""
    if any(len(fs) != order for _, fs in weight.terms):
        return None
    mats, terms = [], []
    for c, fs in weight.terms:
        idx = []
        for A in fs:
            for i, B in enumerate(mats):
                if np.array_equal(A, B):
                    idx.append(i)
                    break
            else:
                mats.append(A)
                idx.append(len(mats) - 1)
        terms.append((c, tuple(idx)))
    return np.array(mats).reshape(-1, 3, 3), terms


def lattice_sum(params: LatticeParams, weight: Weight, pot: Potential, order: int, cfg: SumConfig | None = None) -> SumResult:
    """``sum_{k != 0} weight(k) * f^(order)(Q_L(k))`` with an error estimate."""
    cfg = cfg or SumConfig()
    tol = cfg.tol_for(pot)
    G = gram(params)
    if cfg.strategy == "r-truncated":
        return _r_truncated_sum(params, weight, pot, order, cfg)
    eta = pot.decay_exponent()
    if cfg.strategy == "direct" or eta == math.inf:
        if 2 * (eta + order) - weight.degree <= 3:
            raise NotConvergent(
                f"summand decays like |k|^{weight.degree - 2 * (eta + order)}; need < -3"
            )
        return _direct_weighted(G, weight, pot, order, cfg, tol)
    mapped = _weight_directions(weight, order)
    if mapped is None:
        raise InvalidParameters(
            "the gamma backend needs weight degree 2*order built from quadratic-form factors; "
            "use strategy='direct'"
        )
    mats, terms = mapped
    jet = radial_jet(pot, G, mats if len(mats) else None, None, cfg, order=order)
    if order == 0:
        value = sum(c for c, _ in terms) * jet.value
    elif order == 1:
        value = sum(c * jet.grad[i] for c, (i,) in terms)
    else:
        value = sum(c * jet.hess[i, j] for c, (i, j) in terms)
    return SumResult(float(value), jet.est_error, jet.points_used, jet.converged)


def _direct_weighted(G, weight, pot, order, cfg, tol) -> SumResult:
    deg = weight.degree
    wnorm = sum(abs(c) * math.prod(_form_norm(A, G) for A in fs) for c, fs in weight.terms)
    comps = pot.components()

    def fj(q):
        return sum(c * p.eval(q, order) for c, p in comps)

    if isinstance(pot, Gaussian):
        radial = _Radial(lambda q, o: np.abs(pot.eval(q, order)) * (wnorm * q ** (deg / 2.0) if deg else 1.0), 30.0 / pot.alpha)
        cutoff, est = _choose_cutoff(G, radial, tol, 0.0, 0.0, 0, cfg.max_points)
        pts = _backend.ball_points(G, cutoff)
        q = _backend.quad_values(pts, G)
        val = _backend.compensated_dot(weight(pts), fj(q))
        return SumResult(val, est, len(pts), est <= tol)
    eta = pot.decay_exponent() + order - deg / 2.0
    ratio = cfg.cutoff_growth ** ((3.0 - 2.0 * eta) / 2.0)

    def evaluate(cutoff):
        pts = _backend.ball_points(G, cutoff)
        q = _backend.quad_values(pts, G)
        return np.array([_backend.compensated_dot(weight(pts), fj(q))]), len(pts)

    flat, est, n = _growth_loop(evaluate, G, ratio, cfg, tol)
    return SumResult(float(flat[0]), est, n, True)


def _r_truncated_sum(params, weight, pot, order, cfg) -> SumResult:
    ref = D3.with_volume(params.V)
    if not np.allclose(params.moduli, ref.moduli, rtol=0, atol=1e-14):
        raise InvalidParameters("r-truncated summation is only valid at the FCC point D3")
    C = params.C
    t = cfg.t_max
    value = r_shell_sum(lambda R: pot.eval(C * R, order), weight, t)
    check = r_shell_sum(lambda R: pot.eval(C * R, order), weight, 2 * t)
    est = abs(check - value)
    tol = cfg.tol_for(pot)
    return SumResult(value, est, len(shell_table(t)[0]), est <= tol)


# --------------------------------------------------------------------------
# FCC shells


@functools.lru_cache(maxsize=16)
def shell_table(t_max: int):
    """Integer triples with ``1 <= R <= t_max`` sorted by ``(R, m, n, p)``.

    Returns ``(pts, R, starts)`` where shell ``t`` occupies
    ``pts[starts[t]:starts[t + 1]]``.  Arrays are read-only.
    """
    if t_max < 1:
        raise InvalidParameters("t_max must be >= 1")
    pts = _backend.ball_points(R_MATRIX, t_max + 0.5)
    m, n, p = pts[:, 0], pts[:, 1], pts[:, 2]
    R = m * m + n * n + p * p + m * p + n * p
    order = np.lexsort((p, n, m, R))
    pts = np.ascontiguousarray(pts[order])
    R = R[order]
    starts = np.searchsorted(R, np.arange(t_max + 2))
    for arr in (pts, R, starts):
        arr.flags.writeable = False
    return pts, R, starts


def shell_totals(weight: Weight, t_max: int) -> np.ndarray:
    """``W[t] = sum_{R(k) = t} weight(k)`` for ``t = 0..t_max`` (``W[0] = 0``).

    Integer-valued weights are summed exactly.
    """
    pts, R, _ = shell_table(t_max)
    return np.bincount(R, weights=weight(pts), minlength=t_max + 1)


def r_shell_sum(F, weight: Weight, t_max: int) -> float:
    """``sum_{1 <= R(k) <= t_max} weight(k) F(R(k))``, accumulated shell by shell."""
    W = shell_totals(weight, t_max)[1:]
    t = np.arange(1, t_max + 1, dtype=float)
    return _backend.compensated_dot(W, np.asarray(F(t), dtype=float))


def cumulative_T(t: int) -> int:
    """``A(t) = sum_{R(k) <= t} T(k)``, exact."""
    if t < 1:
        raise InvalidParameters("t must be >= 1")
    pts, _, _ = shell_table(t)
    m, n, p = (pts[:, i].astype(object) for i in range(3))
    return int(np.sum(m * n * (m + p) * (n + p)))
