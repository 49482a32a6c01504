"""Fixed-volume Bravais lattices in the five moduli (u, v, x, y, z).

A lattice of unit-cell volume ``V`` is described by the quadratic form

    Q(m, n, p) = (C/u) [ (m + x n + y p)^2 + v^2 (n + z p)^2 + u^3/(2 v^2) p^2 ],

with ``C = 2**(1/3) * V**(2/3)``.  Lattices are compared up to rotation and
reflection, i.e. through their Gram matrices.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from lattab import _backend
from lattab.errors import DegenerateBasis, InvalidParameters

PARAM_NAMES = ("u", "v", "x", "y", "z")
CBRT2 = 2.0 ** (1.0 / 3.0)


@dataclass(frozen=True)
class LatticeParams:
    """Moduli of a Bravais lattice together with its cell volume ``V``."""

    u: float
    v: float
    x: float
    y: float
    z: float
    V: float = 1.0

    def __post_init__(self):
        for name in ("u", "v", "x", "y", "z", "V"):
            val = getattr(self, name)
            if not math.isfinite(val):
                raise InvalidParameters(f"{name} must be finite, got {val!r}")
        if self.u <= 0 or self.v <= 0 or self.V <= 0:
            raise InvalidParameters(
                f"u, v and V must be positive (u={self.u}, v={self.v}, V={self.V})"
            )

    @property
    def C(self) -> float:
        return CBRT2 * self.V ** (2.0 / 3.0)

    @property
    def moduli(self) -> tuple[float, float, float, float, float]:
        return (self.u, self.v, self.x, self.y, self.z)

    def with_volume(self, V: float) -> "LatticeParams":
        return LatticeParams(self.u, self.v, self.x, self.y, self.z, V)

    def to_dict(self) -> dict:
        return {"u": self.u, "v": self.v, "x": self.x, "y": self.y, "z": self.z, "V": self.V}

    @classmethod
    def from_dict(cls, d: dict) -> "LatticeParams":
        try:
            return cls(*(float(d[k]) for k in ("u", "v", "x", "y", "z")), float(d.get("V", 1.0)))
        except KeyError as exc:
            raise InvalidParameters(f"missing lattice field {exc.args[0]!r}") from None


Z3 = LatticeParams(CBRT2, 1.0, 0.0, 0.0, 0.0)
D3 = LatticeParams(1.0, 1.0, 0.0, 0.5, 0.5)
# Dual of D3 in these coordinates; derived once from the inverse-transpose basis
# and a unimodular change of basis (see tests/test_lattice.py).
D3STAR = LatticeParams(1.0 / CBRT2, 1.0, 0.0, 0.5, 0.5)

NAMED = {"z3": Z3, "d3": D3, "d3star": D3STAR}


def named(name: str, V: float = 1.0) -> LatticeParams:
    """Canonical parameter point ``z3``, ``d3`` or ``d3star`` at volume ``V``."""
    try:
        return NAMED[name.lower()].with_volume(V)
    except KeyError:
        raise InvalidParameters(f"unknown lattice name {name!r}; expected one of {sorted(NAMED)}") from None


def quadratic_form(params: LatticeParams, m, n, p):
    """Squared length of ``m v1 + n v2 + p v3``; works on scalars or arrays."""
    u, v, x, y, z = params.moduli
    a = m + x * n + y * p
    b = n + z * p
    return (params.C / u) * (a * a + v * v * b * b + (u**3 / (2.0 * v * v)) * p * p)


def gram(params: LatticeParams) -> np.ndarray:
    u, v, x, y, z = params.moduli
    c = params.C
    a = np.array([1.0, x, y])
    b = np.array([0.0, 1.0, z])
    e3 = np.array([0.0, 0.0, 1.0])
    return c * (np.outer(a, a) / u + (v * v / u) * np.outer(b, b) + (u * u / (2 * v * v)) * np.outer(e3, e3))


def gram_derivatives(params: LatticeParams) -> tuple[np.ndarray, np.ndarray]:
    """First and second derivatives of the Gram matrix in (u, v, x, y, z).

    Returns ``(dG, d2G)`` with shapes ``(5, 3, 3)`` and ``(5, 5, 3, 3)``.
    Contracting with an integer triple ``k`` gives the polynomial weights
    that multiply ``f'`` in the first and second energy derivatives.
    """
    u, v, x, y, z = params.moduli
    c = params.C
    a = np.array([1.0, x, y])
    b = np.array([0.0, 1.0, z])
    e2 = np.array([0.0, 1.0, 0.0])
    e3 = np.array([0.0, 0.0, 1.0])
    aa, bb, ee = np.outer(a, a), np.outer(b, b), np.outer(e3, e3)

    def sym(p, q):
        return np.outer(p, q) + np.outer(q, p)

    dG = np.empty((5, 3, 3))
    dG[0] = c * (-aa / u**2 - (v * v / u**2) * bb + (u / v**2) * ee)
    dG[1] = c * ((2 * v / u) * bb - (u * u / v**3) * ee)
    dG[2] = (c / u) * sym(e2, a)
    dG[3] = (c / u) * sym(e3, a)
    dG[4] = (c * v * v / u) * sym(e3, b)

    d2G = np.zeros((5, 5, 3, 3))
    d2G[0, 0] = c * ((2 / u**3) * aa + (2 * v * v / u**3) * bb + ee / v**2)
    d2G[1, 1] = c * ((2 / u) * bb + (3 * u * u / v**4) * ee)
    d2G[0, 1] = c * (-(2 * v / u**2) * bb - (2 * u / v**3) * ee)
    d2G[2, 2] = (2 * c / u) * np.outer(e2, e2)
    d2G[3, 3] = (2 * c / u) * ee
    d2G[4, 4] = (2 * c * v * v / u) * ee
    d2G[2, 3] = (c / u) * sym(e2, e3)
    d2G[0, 2] = -(c / u**2) * sym(e2, a)
    d2G[0, 3] = -(c / u**2) * sym(e3, a)
    d2G[0, 4] = -(c * v * v / u**2) * sym(e3, b)
    d2G[1, 4] = (2 * c * v / u) * sym(e3, b)
    for i, j in itertools.combinations(range(5), 2):
        d2G[j, i] = d2G[i, j]
    return dG, d2G


@dataclass(frozen=True)
class Basis3:
    """Three basis vectors, stored as the rows of ``matrix``."""

    v1: tuple[float, float, float]
    v2: tuple[float, float, float]
    v3: tuple[float, float, float]

    @classmethod
    def from_matrix(cls, mat) -> "Basis3":
        mat = np.asarray(mat, dtype=float)
        if mat.shape != (3, 3):
            raise InvalidParameters(f"basis must be 3x3, got shape {mat.shape}")
        return cls(*(tuple(float(t) for t in row) for row in mat))

    @property
    def matrix(self) -> np.ndarray:
        return np.array([self.v1, self.v2, self.v3], dtype=float)

    def gram(self) -> np.ndarray:
        m = self.matrix
        return m @ m.T


def basis(params: LatticeParams) -> Basis3:
    """Lower-triangular basis realising ``params`` (determinant ``V``)."""
    u, v, x, y, z = params.moduli
    s = math.sqrt(params.C / u)
    return Basis3(
        (s, 0.0, 0.0),
        (s * x, s * v, 0.0),
        (s * y, s * v * z, math.sqrt(params.C) * u / (v * math.sqrt(2.0))),
    )


def params_from_gram(G) -> LatticeParams:
    """Invert :func:`gram` by the triangular solve on the Gram entries."""
    G = np.asarray(G, dtype=float)
    det = float(np.linalg.det(G))
    if not det > 0:
        raise DegenerateBasis(f"Gram matrix is not positive definite (det={det})")
    V = math.sqrt(det)
    c = CBRT2 * V ** (2.0 / 3.0)
    u = c / G[0, 0]
    x = G[0, 1] / G[0, 0]
    y = G[0, 2] / G[0, 0]
    v2 = u * G[1, 1] / c - x * x
    if not v2 > 0:
        raise DegenerateBasis("Gram matrix is not positive definite")
    z = (u * G[1, 2] / c - x * y) / v2
    return LatticeParams(u, math.sqrt(v2), x, y, z, V)


def params_from_basis(b) -> LatticeParams:
    """Moduli of the lattice spanned by ``b`` (a :class:`Basis3` or 3x3 rows)."""
    mat = b.matrix if isinstance(b, Basis3) else np.asarray(b, dtype=float)
    scale = max(float(np.linalg.norm(row)) for row in mat)
    det = float(np.linalg.det(mat))
    if scale == 0 or abs(det) < 1e-12 * scale**3:
        raise DegenerateBasis(f"|det| = {abs(det):.3e} is below 1e-12 * scale^3")
    return params_from_gram(mat @ mat.T)


def dual(params: LatticeParams) -> LatticeParams:
    """Parameters of the dual lattice (volume ``1/V``).

    Uses the inverse-transpose of :func:`basis`; the result is a basis of the
    dual lattice, not a reduced one, so compare with :func:`gram_equivalent`.
    """
    return params_from_basis(np.linalg.inv(basis(params).matrix).T)


@dataclass(frozen=True)
class FormValue:
    I: float
    R: int
    T: int


def form_values(m: int, n: int, p: int) -> FormValue:
    """The ternary forms I, R and T at an integer triple."""
    return FormValue(
        I=(m * m + n * n + p * p) / CBRT2,
        R=m * m + n * n + p * p + m * p + n * p,
        T=m * n * (m + p) * (n + p),
    )


def gram_equivalent(a: LatticeParams, b: LatticeParams, tol: float = 1e-10) -> bool:
    """True if ``a`` and ``b`` describe the same lattice up to isometry.

    Searches for an integer change of basis ``U`` (``|det U| = 1``) with
    ``U^T G_a U = G_b`` among the lattice vectors of ``a`` whose lengths match
    the diagonal of ``G_b``.
    """
    Ga, Gb = gram(a), gram(b)
    scale = max(np.abs(Ga).max(), np.abs(Gb).max())
    atol = tol * scale
    if abs(a.V - b.V) > tol * max(a.V, b.V):
        return False
    pts = _backend.ball_points(Ga, float(Gb.diagonal().max()) + atol)
    norms = np.einsum("ni,ij,nj->n", pts, Ga, pts)
    cands = [pts[np.abs(norms - Gb[j, j]) <= atol] for j in range(3)]
    for c1 in cands[0]:
        for c2 in cands[1]:
            if abs(c1 @ Ga @ c2 - Gb[0, 1]) > atol:
                continue
            for c3 in cands[2]:
                if abs(c1 @ Ga @ c3 - Gb[0, 2]) > atol or abs(c2 @ Ga @ c3 - Gb[1, 2]) > atol:
                    continue
                if abs(round(np.linalg.det(np.array([c1, c2, c3], dtype=float)))) == 1:
                    return True
    return False
