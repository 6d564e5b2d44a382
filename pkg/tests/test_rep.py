import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from operlab.errors import CapExceeded
from operlab.liealg_core import build_algebra, weyl_dimension
from operlab.rep import (WedgeSquare, adjoint_module, build_fundamental, build_m_map, cyclic_element,
                         cyclic_spectrum, ensure_normalized, maximal_eigen_index, normalize_v_theta, r_map,
                         sigma_twist, wedge_maximal_check, zeta_of)


@pytest.mark.parametrize("name", ["A1", "A2", "A3", "A5", "D4", "D5", "A5^2", "D3^2", "D4^3"])
def test_fundamental_dimensions_and_relations(name):
    alg = build_algebra(name)
    ct = alg.cartan_tilde
    for i in range(1, ct.shape[0] + 1):
        mod = build_fundamental(alg, i)
        assert mod.dim == weyl_dimension(ct, [int(j == i - 1) for j in range(ct.shape[0])])
        assert mod.relation_residual() < 1e-12
        for a in range(ct.shape[0]):
            # h_a is diagonal with the Dynkin label as eigenvalue
            assert np.allclose(mod.h[a], np.diag([w[a] for w in mod.weights]))


def test_small_examples():
    a1 = build_algebra("A1")
    m = build_fundamental(a1, 1)
    assert m.dim == 2 and m.weights == [(1,), (-1,)]
    assert build_fundamental(build_algebra("A2"), 1).dim == 3
    assert build_fundamental(build_algebra("D4"), 2).dim == 28


@pytest.mark.parametrize("name", ["A2", "D4", "D3^2", "D4^3"])
def test_modules_represent_the_bracket(name):
    alg = build_algebra(name)
    g = alg.lie.g
    mod = build_fundamental(alg, 1)
    rng = np.random.default_rng(3)
    x, y = rng.normal(size=g.dim), rng.normal(size=g.dim)
    X, Y = mod.rep(x), mod.rep(y)
    assert np.allclose(X @ Y - Y @ X, mod.rep(g.bracket(x, y)), atol=1e-10)


def test_adjoint_module():
    alg = build_algebra("A2")
    ad = adjoint_module(alg)
    assert ad.dim == 8
    g = alg.lie.g
    x, y = g.e(0), g.f(1)
    assert np.allclose(ad.rep(x) @ ad.rep(y) - ad.rep(y) @ ad.rep(x), ad.rep(g.bracket(x, y)))


def test_a1_spectra():
    alg = build_algebra("A1")
    mod = build_fundamental(alg, 1)
    assert np.allclose(mod.rep(cyclic_element(alg, 0.0)), [[0, 1], [1, 0]])
    cs = cyclic_spectrum(alg, mod, 0.0)
    assert np.allclose(sorted(cs.eigenvalues.real), [-1, 1])
    assert abs(cs.maximal - 1) < 1e-14
    half = cyclic_spectrum(alg, mod, 0.5)
    assert np.allclose(sorted(half.eigenvalues.imag), [-1, 1])
    assert half.maximal_index is None


def test_a2_eigenvalues_are_cube_roots():
    alg = build_algebra("A2")
    cs = cyclic_spectrum(alg, build_fundamental(alg, 1), float(alg.kappa[0]))
    assert np.allclose(cs.eigenvalues ** 3, 1)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_zeta_for_a_n(n):
    alg = build_algebra(f"A{n}")
    cs = cyclic_spectrum(alg, build_fundamental(alg, 1), float(alg.kappa[0]))
    assert abs(cs.zeta - math.pi / (n + 1)) < 1e-12


@pytest.mark.parametrize("name", ["A3", "D4", "D3^2", "D4^3"])
def test_zeta_against_grid(name):
    alg = build_algebra(name)
    cs = cyclic_spectrum(alg, build_fundamental(alg, 1), float(alg.kappa[0]))
    mu = cs.eigenvalues
    k = cs.maximal_index
    eps = 1e-6

    def dominant(phi):
        re = (mu * cmath.exp(1j * phi)).real
        return all(re[k] > re[j] for j in range(len(mu)) if j != k)

    assert all(dominant(p) for p in np.linspace(-cs.zeta + eps, cs.zeta - eps, 401))
    assert not (dominant(cs.zeta + 1e-3) and dominant(-cs.zeta - 1e-3))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
                min_size=2, max_size=6))
def test_maximal_eigen_index_definition(vals):
    vals = np.array(vals)
    k = maximal_eigen_index(vals, gap=1e-9)
    if k is not None:
        mu = vals[k]
        assert abs(mu.imag) <= 1e-9 * np.abs(vals).max()
        assert all(mu.real > v.real for j, v in enumerate(vals) if j != k)
        # the closed-form zeta is where dominance first fails
        z = zeta_of(vals, k)
        assert 0 < z <= math.pi / 2


@pytest.mark.parametrize("name", ["A1", "A2", "A3", "D4", "A5^2", "D3^2", "D4^3"])
def test_normalisation_is_idempotent(name):
    alg = build_algebra(name)
    ensure_normalized(alg)
    assert normalize_v_theta(alg) == 1.0
    cs = cyclic_spectrum(alg, build_fundamental(alg, 1), float(alg.kappa[0]))
    assert abs(cs.maximal - 1) < 1e-12


@pytest.mark.parametrize("name", ["A2", "A3", "A4", "D4", "A5^2", "D3^2", "D4^2", "D4^3"])
def test_wedge_maximal_eigenvalue(name):
    alg = build_algebra(name)
    for i in range(1, alg.n + 1):
        got, want = wedge_maximal_check(alg, i)
        assert abs(got - want) < 1e-8


def test_wedge_cap():
    alg = build_algebra("D5")
    got, want = wedge_maximal_check(alg, 2)
    assert abs(got - want) < 1e-8
    # node 3 is 120-dimensional, its wedge square is over the cap
    with pytest.raises(CapExceeded):
        wedge_maximal_check(alg, 3)


def test_m_map_a1_is_scalar():
    alg = build_algebra("A1")
    mm = build_m_map(alg, 1)
    assert mm.target_nodes == []
    src = mm.source.wedge(np.array([1, 0]), np.array([0, 1]))
    assert np.allclose(mm.matrix @ src, [1])


@pytest.mark.parametrize("name", ["A2", "A3", "D4", "D3^2"])
def test_m_map_normalisation_and_equivariance(name):
    alg = build_algebra(name)
    g = alg.lie.g
    for i in range(1, alg.n + 1):
        mm = build_m_map(alg, i)
        node = alg.orbit_reps[i - 1]
        base = build_fundamental(alg, node)
        v = base.hw_vector()
        src = mm.source.wedge(v, base.rep(g.f(node - 1)) @ v)
        tgt = mm.target.tensor([build_fundamental(alg, j).hw_vector() for j in mm.target_nodes])
        assert np.allclose(mm.matrix @ src, tgt, atol=1e-12)
        for a in range(g.rank):
            for x in (g.e(a), g.f(a)):
                res = mm.matrix @ mm.source.rep(x) - mm.target.rep(x) @ mm.matrix
                assert np.abs(res).max() < 1e-10


@pytest.mark.parametrize("name", ["A2", "A3", "D4"])
def test_algebraic_psi_system(name):
    """m(psi_wedge) is collinear with the tensor product of the maximal eigenvectors (r = 1)."""
    alg = build_algebra(name)
    ensure_normalized(alg)
    lie, h = alg.lie, alg.h
    for i in range(1, alg.n + 1):
        mm = build_m_map(alg, i)
        mod = build_fundamental(alg, i)
        psi = cyclic_spectrum(alg, mod, float(alg.kappa[i - 1])).psi
        rho = mod.rep(lie.rho_vee)
        wedge = mm.source.wedge(expm(1j * math.pi / h * rho) @ psi, expm(-1j * math.pi / h * rho) @ psi)
        out = mm.matrix @ wedge
        # eigenvector of Lambda(kappa_i - 1/2) on the wedge square
        lam_w = mm.source.rep(cyclic_element(alg, float(alg.kappa[i - 1]) - 0.5))
        mu = 2 * math.cos(math.pi / h) * cyclic_spectrum(alg, mod, float(alg.kappa[i - 1])).maximal
        assert np.abs(lam_w @ wedge - mu * wedge).max() < 1e-10
        tgt = mm.target.tensor([cyclic_spectrum(alg, build_fundamental(alg, j), float(alg.kappa[j - 1])).psi
                                for j in mm.target_nodes])
        c = np.vdot(tgt, out) / np.vdot(tgt, tgt)
        assert abs(c) > 0.1
        assert np.abs(out - c * tgt).max() < 1e-8 * np.abs(out).max()


def test_sigma_twist_trivial_for_untwisted():
    alg = build_algebra("A3")
    for i in range(1, 4):
        assert np.allclose(sigma_twist(alg, i), np.eye(build_fundamental(alg, i).dim))


def test_g2_twist_has_order_three():
    alg = build_algebra("D4^3")
    T = sigma_twist(alg, 2)
    assert np.allclose(np.linalg.matrix_power(T, 3), np.eye(28), atol=1e-12)
    assert not np.allclose(T, np.eye(28))


@pytest.mark.parametrize("name, node", [("D4^3", 1), ("D4^3", 2), ("D3^2", 2), ("A5^2", 1), ("A5^2", 3)])
def test_twist_intertwines(name, node):
    alg = build_algebra(name)
    lie = alg.lie
    g = lie.g
    src = build_fundamental(alg, node)
    dst = build_fundamental(alg, alg.sigma[node - 1])
    T = sigma_twist(alg, node)
    rng = np.random.default_rng(5)
    x = rng.normal(size=g.dim)
    assert np.allclose(T @ src.rep(x), dst.rep(lie.sigma @ x) @ T, atol=1e-10)
    # weight spaces go to sigma-permuted weight spaces
    perm = [alg.sigma[a] - 1 for a in range(len(alg.sigma))]
    for col in range(src.dim):
        rows = np.nonzero(np.abs(T[:, col]) > 1e-12)[0]
        mu = src.weights[col]
        sigma_mu = tuple(mu[perm.index(a)] for a in range(len(mu)))
        assert all(dst.weights[r] == sigma_mu for r in rows)


def test_r_map_is_identity_off_fixed_nodes():
    alg = build_algebra("D4^3")
    fixed = [i for i in range(1, 5) if alg.sigma[i - 1] == i]
    assert fixed == [2]
    assert np.allclose(r_map(alg, 2), sigma_twist(alg, 2))
    assert np.allclose(r_map(alg, 1), np.eye(8))


def test_wedge_square_rep_is_derivation():
    alg = build_algebra("A3")
    mod = build_fundamental(alg, 2)
    w = WedgeSquare(mod)
    x = alg.lie.f_circ
    u, v = np.arange(6.0), np.arange(6.0)[::-1] ** 2
    lhs = w.rep(x) @ w.wedge(u, v)
    rhs = w.wedge(mod.rep(x) @ u, v) + w.wedge(u, mod.rep(x) @ v)
    assert np.allclose(lhs, rhs)
