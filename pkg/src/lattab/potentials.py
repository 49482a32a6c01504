"""Radial potentials, always evaluated on SQUARED distances.

``E_f[L] = sum_{p != 0} f(|p|^2)``: a Gaussian ``exp(-alpha r)`` here is a
Gaussian in the distance, and ``InversePower(s)`` is ``|p|^(-2s)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from lattab.errors import InvalidParameters, NonPositiveArgument


def _check_r(r):
    arr = np.asarray(r, dtype=float)
    if np.any(arr <= 0) or np.any(np.isnan(arr)):
        raise NonPositiveArgument("potentials are defined for r > 0 only")
    return arr


class Potential:
    """Common interface of the three built-in families."""

    def eval(self, r, order: int = 0):
        raise NotImplementedError

    def decay_exponent(self) -> float:
        raise NotImplementedError

    def spec(self) -> str:
        raise NotImplementedError

    def components(self) -> list[tuple[float, "Potential"]]:
        """Linear decomposition into pure families."""
        return [(1.0, self)]


@dataclass(frozen=True)
class Gaussian(Potential):
    alpha: float

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise InvalidParameters(f"Gaussian needs alpha > 0, got {self.alpha}")

    def eval(self, r, order=0):
        r = _check_r(r)
        out = (-self.alpha) ** order * np.exp(-self.alpha * r)
        return float(out) if out.ndim == 0 else out

    def decay_exponent(self):
        return math.inf

    def spec(self):
        return f"gaussian:alpha={self.alpha!r}"


@dataclass(frozen=True)
class InversePower(Potential):
    s: float

    def __post_init__(self):
        if not (self.s > 0 and math.isfinite(self.s)):
            raise InvalidParameters(f"InversePower needs s > 0, got {self.s}")

    def eval(self, r, order=0):
        r = _check_r(r)
        s = self.s
        coef = (1.0, -s, s * (s + 1.0))[order]
        out = coef * r ** (-s - order)
        return float(out) if out.ndim == 0 else out

    def decay_exponent(self):
        return self.s

    def spec(self):
        return f"power:s={self.s!r}"


@dataclass(frozen=True)
class LennardJones(Potential):
    """``a2 r^-x2 - a1 r^-x1`` with ``x1 < x2``."""

    a1: float
    a2: float
    x1: float
    x2: float

    def __post_init__(self):
        if not (self.a1 > 0 and self.a2 > 0):
            raise InvalidParameters("LennardJones needs a1 > 0 and a2 > 0")
        if not (0 < self.x1 < self.x2):
            raise InvalidParameters(f"LennardJones needs 0 < x1 < x2, got x1={self.x1}, x2={self.x2}")

    def components(self):
        return [(self.a2, InversePower(self.x2)), (-self.a1, InversePower(self.x1))]

    def eval(self, r, order=0):
        _check_r(r)
        return sum(c * p.eval(r, order) for c, p in self.components())

    def decay_exponent(self):
        return self.x1

    def spec(self):
        return f"lj:a1={self.a1!r},a2={self.a2!r},x1={self.x1!r},x2={self.x2!r}"


CLASSICAL_LJ = LennardJones(2.0, 1.0, 3.0, 6.0)


def eval(pot: Potential, r, order: int = 0):
    """``f(r)``, ``f'(r)`` or ``f''(r)`` for ``order`` 0, 1 or 2."""
    if order not in (0, 1, 2):
        raise ValueError(f"order must be 0, 1 or 2, got {order}")
    return pot.eval(r, order)


def decay_exponent(pot: Potential) -> float:
    return pot.decay_exponent()


_FAMILIES = {
    "gaussian": (Gaussian, ("alpha",)),
    "power": (InversePower, ("s",)),
    "lj": (LennardJones, ("a1", "a2", "x1", "x2")),
}


def parse_potential(text: str) -> Potential:
    """Parse ``gaussian:alpha=1.5``, ``power:s=3`` or ``lj:a1=2,a2=1,x1=3,x2=6``."""
    family, _, rest = text.partition(":")
    family = family.strip().lower()
    if family not in _FAMILIES:
        raise InvalidParameters(f"unknown potential family {family!r}")
    cls, names = _FAMILIES[family]
    kwargs = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq or key.strip() not in names:
            raise InvalidParameters(f"bad parameter {item!r} for {family}; expected {names}")
        try:
            kwargs[key.strip()] = float(val)
        except ValueError:
            raise InvalidParameters(f"parameter {key.strip()} is not a number: {val!r}") from None
    missing = set(names) - set(kwargs)
    if missing:
        raise InvalidParameters(f"{family} is missing {sorted(missing)}")
    return cls(**kwargs)
