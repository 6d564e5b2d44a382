import cmath
import math

import numpy as np
import pytest
from scipy.optimize import brentq

from operlab.connection import make_spec
from operlab.errors import DenominatorZero, MissingSample, UnsupportedTwistedType
from operlab.qq_bethe import (QFunctionTable, argument_count, bethe_residual, find_zeros, normalisation_factors,
                              psi_system_constant, qq_relative_residual)


class PolyTable:
    """Stand-in table whose Q-functions are fixed polynomials."""

    def __init__(self, spec, polys):
        self.spec = spec
        self.polys = polys

    @property
    def q(self):
        return cmath.exp(1j * math.pi * self.spec.k)

    def Q(self, i, lam):
        return complex(np.polyval(self.polys[i - 1], lam))


@pytest.fixture(scope="module")
def a1_table():
    return QFunctionTable(make_spec("A1", 0.4, [0.3]))


def test_bethe_at_a_zero_and_off_it(a1_table):
    ref = a1_table.Q(1, 0.0)
    z = brentq(lambda x: (a1_table.Q(1, x) / ref).real, -0.8, -0.4, xtol=1e-13)
    assert z == pytest.approx(-0.596, abs=1e-3)
    assert abs(bethe_residual(a1_table, z, 1)) < 1e-6
    assert abs(bethe_residual(a1_table, z + 0.05, 1)) > 1e-3


def test_qq_single_point(a1_table):
    assert qq_relative_residual(a1_table, 1, 0.9) < 1e-6
    assert a1_table.lookup(1, a1_table.q * 0.9) is not None
    with pytest.raises(MissingSample):
        a1_table.lookup(1, 123.0)


def test_bethe_is_invariant_under_rescaling():
    spec = make_spec("A2", 0.4, [0.31, 0.17])
    polys = [[1.0, -0.3 + 0.2j, 2.0], [0.5, 1.0, 0.1j, -1.0]]
    t1 = PolyTable(spec, polys)
    t2 = PolyTable(spec, [[3.0 * c for c in polys[0]], [(0.2 - 1j) * c for c in polys[1]]])
    for lam in (0.3, -1.1 + 0.4j):
        for s in (1, 2):
            assert abs(bethe_residual(t1, lam, s) - bethe_residual(t2, lam, s)) < 1e-12


def test_bethe_denominator_guard():
    spec = make_spec("A1", 0.4, [0.3])
    q = cmath.exp(0.4j * math.pi)
    lam = 0.8
    root = lam / q ** 2
    with pytest.raises(DenominatorZero):
        bethe_residual(PolyTable(spec, [[1.0, -root]]), lam, 1)


def test_argument_count():
    f = lambda z: (z - 1) * (z + 2) * (z - 0.5j)
    assert argument_count(f, (-3, 3, -1, 1)) == 3
    assert argument_count(f, (-3, 0, -1, 0.2)) == 1
    assert argument_count(f, (2, 3, -1, 1)) == 0


def test_find_zeros_two_routes():
    spec = make_spec("A1", 0.4, [0.3])
    roots = [-0.6, -1.5, -2.5]
    table = PolyTable(spec, [np.poly(roots) * (0.3 + 0.4j)])
    # real-axis bracketing, then argument-principle subdivision on a region off the axis
    on_axis = find_zeros(table, 1, (-3, 0, -0.2, 0.2), step=0.25, verify_count=True)
    assert np.allclose(sorted(z.real for z in on_axis), sorted(roots), atol=1e-12)
    shifted = PolyTable(spec, [np.poly([r + 0.5j for r in roots])])
    off_axis = find_zeros(shifted, 1, (-3, 0, 0.3, 0.7), step=0.25)
    assert np.allclose(sorted(z.real for z in off_axis), sorted(roots), atol=1e-10)
    assert np.allclose([z.imag for z in off_axis], 0.5, atol=1e-10)
    dense = find_zeros(table, 1, (-3, 0, -0.2, 0.2), step=0.1)
    assert np.allclose(sorted(z.real for z in dense), sorted(roots), atol=1e-12)
    assert find_zeros(table, 1, (0, -1, 0, 1)) == []
    assert find_zeros(table, 1, (0.1, 1, -0.2, 0.2), step=0.25) == []


@pytest.mark.parametrize("name, ell", [("A2", [0.31, 0.17]), ("A3", [0.1, 0.2, 0.3]), ("D4", [0.1, 0.2, 0.05, 0.15])])
def test_normalisation_makes_constants_one(name, ell):
    spec = make_spec(name, 0.4, ell)
    n = normalisation_factors(spec)
    C = spec.alg.cartan_tilde
    for i in range(1, spec.alg.n + 1):
        c = psi_system_constant(spec, i)
        # m_i scales by n_i^2, the tensor product by prod_j n_j^{-C_ij}
        scaled = c * n[i - 1] ** 2 / np.prod([n[j] ** (-C[i - 1][j]) for j in range(spec.alg.n) if j != i - 1])
        assert abs(scaled - 1) < 1e-10


def test_twisted_is_refused():
    with pytest.raises(UnsupportedTwistedType):
        QFunctionTable(make_spec("D3^2", 0.4, [0.2, 0.11]))
