import math

import numpy as np
import pytest

from lattab.calculus import energy
from lattab.errors import InvalidParameters, NonPositiveArgument
from lattab.lattice import D3, Z3
from lattab.potentials import CLASSICAL_LJ, Gaussian, InversePower, LennardJones, decay_exponent, eval, parse_potential
from lattab.sums import SumConfig

FAMILIES = [Gaussian(1.3), InversePower(3.0), CLASSICAL_LJ]


def test_gaussian_value():
    assert eval(Gaussian(1.0), 1.0) == pytest.approx(math.exp(-1), rel=1e-15)


def test_lj_at_unit_distance():  # [PAPER] r^-12 - 2 r^-6 at r = 1
    assert eval(CLASSICAL_LJ, 1.0) == pytest.approx(-1.0, rel=1e-15)


def test_power_derivative():
    assert eval(InversePower(3.0), 4.0, order=1) == pytest.approx(-0.01171875, rel=1e-15)


def test_decay_exponents():
    assert decay_exponent(Gaussian(2.0)) == math.inf
    assert decay_exponent(CLASSICAL_LJ) == 3.0
    assert decay_exponent(InversePower(2.5)) == 2.5


@pytest.mark.parametrize("pot", FAMILIES, ids=lambda p: p.spec())
@pytest.mark.parametrize("r", [0.5, 1.0, 2.0, 10.0])
def test_finite_difference(pot, r):
    h = 1e-5 * r
    for order in (1, 2):
        fd = (eval(pot, r + h, order - 1) - eval(pot, r - h, order - 1)) / (2 * h)
        exact = eval(pot, r, order)
        assert abs(exact - fd) <= 1e-6 * (1 + abs(exact))


def test_gaussian_completely_monotone():
    r = np.linspace(0.01, 20, 200)
    for k in range(3):
        assert np.all((-1) ** k * eval(Gaussian(0.7), r, k) > 0)


def test_lj_decomposition():
    cfg = SumConfig(target_tol=1e-12)
    for P in (Z3, D3.with_volume(1.2)):
        e = energy(CLASSICAL_LJ, P, cfg).value
        parts = energy(InversePower(6), P, cfg).value - 2 * energy(InversePower(3), P, cfg).value
        assert e == pytest.approx(parts, rel=1e-10)


def test_rejects_bad_arguments():
    with pytest.raises(NonPositiveArgument):
        eval(Gaussian(1.0), 0.0)
    with pytest.raises(NonPositiveArgument):
        eval(CLASSICAL_LJ, -1.0)
    with pytest.raises(ValueError):
        eval(Gaussian(1.0), 1.0, order=3)
    with pytest.raises(InvalidParameters):
        Gaussian(0.0)
    with pytest.raises(InvalidParameters):
        LennardJones(2, 1, 6, 3)


def test_parse():
    assert parse_potential("gaussian:alpha=1.5") == Gaussian(1.5)
    assert parse_potential("power:s=3") == InversePower(3.0)
    assert parse_potential("lj:a1=2,a2=1,x1=3,x2=6") == CLASSICAL_LJ
    for bad in ("morse:a=1", "gaussian:beta=1", "lj:a1=2", "power:s=abc"):
        with pytest.raises(InvalidParameters):
            parse_potential(bad)
    for pot in FAMILIES:
        assert parse_potential(pot.spec()) == pot
