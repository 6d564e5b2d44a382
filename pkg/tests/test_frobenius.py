import cmath
import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from operlab.connection import coefficient_matrix, make_spec
from operlab.errors import NotGeneric, OutsideValidityRadius
from operlab.frobenius import (build_frobenius, check_generic, chi_system_constant, eval_frobenius,
                               frobenius_frame, frobenius_seeds, recurrence_residual)
from operlab.rep import build_fundamental


def rk_transport(spec, mod, z0, z1, lam, psi0, logz0):
    """Straight-line transport of Psi' = -A Psi with scipy's RK (oracle)."""
    dz = z1 - z0
    n = mod.dim

    def rhs(s, y):
        z = z0 + s * dz
        logz = logz0 + cmath.log(z / z0)
        A = coefficient_matrix(spec, mod, z, lam, logz=logz)
        Y = (y[:n * n] + 1j * y[n * n:]).reshape(n, n)
        d = (-A @ Y * dz).ravel()
        return np.concatenate([d.real, d.imag])

    y0 = np.asarray(psi0).ravel()
    sol = solve_ivp(rhs, (0, 1), np.concatenate([y0.real, y0.imag]), method="DOP853", rtol=1e-12, atol=1e-13)
    y = sol.y[:, -1]
    return (y[:n * n] + 1j * y[n * n:]).reshape(n, n)


def test_genericity():
    mod = build_fundamental(make_spec("A1", 0.4, [0.31]).alg, 1)
    rep = check_generic(make_spec("A1", 0.4, [0.31]), [mod])
    assert rep.generic and rep.violation is None
    assert rep.min_gap == pytest.approx(0.09)
    # 2 * 0.4 - 0.8 = 0 resonates
    with pytest.raises(NotGeneric):
        check_generic(make_spec("A1", 0.4, [0.8]), [mod])
    with pytest.raises(NotGeneric):
        check_generic(make_spec("A1", 0.4, [1.0]), [mod])
    rep = check_generic(make_spec("A1", 0.4, [1.0]), [mod], raise_on_failure=False)
    assert not rep.generic and rep.violation[3:] == (1, 0)


@pytest.mark.parametrize("node", [1, 2])
def test_seeds_are_eigenvectors(a2_spec, node):
    mod = build_fundamental(a2_spec.alg, node)
    F = mod.rep(a2_spec.base_element())
    ells = np.diag(mod.rep(a2_spec.alg.lie.ell_element(a2_spec.ell)))
    seeds = frobenius_seeds(a2_spec, mod)
    for b in range(mod.dim):
        assert seeds[b, b] == 1
        assert np.allclose(F @ seeds[:, b], ells[b] * seeds[:, b], atol=1e-13)
        sol = build_frobenius(a2_spec, mod, b, 8, 6)
        assert np.array_equal(sol.seed, seeds[:, b])
        assert sol.gamma == pytest.approx(ells[b])


def test_first_coefficient_by_hand(a1_spec):
    # (f + ell - gamma + 1) c_{1,0} = -A_1 c_{0,0} with A_1 = v_theta (no singularities)
    mod = build_fundamental(a1_spec.alg, 1)
    sol = build_frobenius(a1_spec, mod, 0, 4, 3)
    F = np.array([[0.15, 0], [1, -0.15]])
    V = np.array([[0, 1], [0, 0]])
    g = sol.gamma
    want = np.linalg.solve(F + (1 - g) * np.eye(2), -V @ sol.seed)
    assert np.allclose(sol.coeffs[1, 0], want, atol=1e-14)
    want = np.linalg.solve(F + (0.4 - g) * np.eye(2), -V @ sol.seed)
    assert np.allclose(sol.coeffs[0, 1], want, atol=1e-14)


@pytest.mark.parametrize("sings", [[], [(1.5, [0.3])], [(1.5, [0.3]), (-1.2 + 0.8j, [-0.2])]])
def test_recurrence_residual(sings):
    spec = make_spec("A1", 0.4, [0.3], sings)
    mod = build_fundamental(spec.alg, 1)
    for b in range(2):
        sol = build_frobenius(spec, mod, b, 30, 20)
        assert recurrence_residual(spec, mod, sol) < 1e-12


@pytest.mark.parametrize("name, ell, sings, node", [
    ("A1", [0.3], [(2.0, [0.3])], 1),
    ("A2", [0.31, 0.17], [(1.8 + 0.3j, [0.2, 0.1, -0.3])], 2),
])
def test_frame_agrees_with_rk(name, ell, sings, node):
    spec = make_spec(name, 0.4, ell, sings)
    mod = build_fundamental(spec.alg, node)
    fr = frobenius_frame(spec, mod)
    lam = 0.7 + 0.3j
    z0, z1 = 0.3 + 0.1j, 0.9 - 0.4j
    psi0 = fr.matrix(z0, lam)
    got = rk_transport(spec, mod, z0, z1, lam, psi0, cmath.log(z0))
    want = fr.matrix(z1, lam)
    assert np.abs(got - want).max() < 1e-8 * np.abs(want).max()
    assert fr.error(z1, lam) < 1e-10


def test_continuation_around_origin(a1_spec):
    """RK around |z| = 0.5 lands on the series evaluated on the next sheet of log z."""
    mod = build_fundamental(a1_spec.alg, 1)
    fr = frobenius_frame(a1_spec, mod)
    lam = 0.8 - 0.1j
    psi = fr.matrix(0.5, lam)
    logz = math.log(0.5)
    z = 0.5
    for q in range(8):
        z1 = 0.5 * cmath.exp(2j * math.pi * (q + 1) / 8)
        psi = rk_transport(a1_spec, mod, z, z1, lam, psi, logz)
        logz = logz + 2j * math.pi / 8
        z = z1
    want = fr.matrix(0.5, lam, logz=math.log(0.5) + 2j * math.pi)
    assert np.abs(psi - want).max() < 1e-8
    # on the next sheet with lam rotated back, each column picks up exp(-2 pi i gamma)
    lam0 = 0.8
    rot = fr.rotated(0.5, lam0, 1.0)
    base = fr.matrix(0.5, lam0)
    for b, sol in enumerate(fr.solutions):
        assert np.allclose(rot[:, b], cmath.exp(-2j * math.pi * sol.gamma) * base[:, b], atol=1e-12)


def test_outside_radius():
    spec = make_spec("A1", 0.4, [0.3], [(1.0, [0.3])])
    mod = build_fundamental(spec.alg, 1)
    sol = build_frobenius(spec, mod, 0, 20, 10)
    assert sol.rho == pytest.approx(0.8)
    with pytest.raises(OutsideValidityRadius):
        eval_frobenius(sol, 0.9, 0.1)
    eval_frobenius(sol, 0.9, 0.1, check_radius=False)


def test_chi_system_constant(a1_spec):
    mod = build_fundamental(a1_spec.alg, 1)
    fr = frobenius_frame(a1_spec, mod)
    s = 0.25
    c = chi_system_constant(a1_spec, mod, 0, 1, s)
    # bilinear pairing of the z^{-gamma} prefactors, rotated by -s and +s, over the unrotated one
    z = 0.01
    g0, g1 = fr.solutions[0].gamma, fr.solutions[1].gamma
    lead0 = cmath.exp(-g0 * (math.log(z) - 2j * math.pi * s))
    lead1 = cmath.exp(-g1 * (math.log(z) + 2j * math.pi * s))
    ratio = lead0 * lead1 / cmath.exp(-(g0 + g1) * math.log(z))
    assert abs(c - ratio) < 1e-14
    assert abs(abs(c) - 1) < 1e-14
