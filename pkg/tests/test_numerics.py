import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from operlab.errors import NoConvergence, ValidationError
from operlab.numerics import (PathSpec, Segment, circle_path, complex_step_jacobian, condition_number,
                              eig_checked, forward_difference_jacobian, get_tolerances, holomorphic_jacobian,
                              integrate_ode, newton_solve, nullspace, override_tolerances, parallel_map,
                              ray_path, set_profile)


@pytest.fixture(autouse=True)
def _restore_profile():
    yield
    set_profile("default")


def test_constant_coefficient_is_matrix_exponential():
    M = np.array([[0.2, 1.0], [-0.5, 0.1j]])
    path = PathSpec([Segment.line(1.0, 2.0 + 1.5j)])
    tr = integrate_ode(lambda z, lz: M, path, np.eye(2))
    assert np.allclose(tr.value, expm(M * (1.0 + 1.5j)), atol=1e-10)


def test_round_trip_reverses():
    A = lambda z, lz: np.array([[0, 1], [z ** 2, cmath.exp(0.4 * lz)]]) / z
    path = PathSpec([Segment.ray(0.3, 0.5, 3.0), Segment.arc(0.0, 3.0, 0.3, 2.0)])
    y0 = np.array([1.0, -0.5j])
    fwd = integrate_ode(A, path, y0, rtol=1e-12)
    back = integrate_ode(A, path.reversed(), fwd.value, rtol=1e-12)
    assert np.allclose(back.value, y0, atol=1e-9)
    assert back.log_end == pytest.approx(path.log_start)


def test_log_continuation_and_winding():
    path = circle_path(0.0, 2.0, turns=2, pieces=4)
    assert path.winding() == pytest.approx(2.0)
    assert path.log_end() == pytest.approx(complex(math.log(2.0), 4 * math.pi))
    # z^k after two turns: dy/dz = k y / z with y = z^k on the cover
    k = 0.3
    tr = integrate_ode(lambda z, lz: np.array([[k / z]]), path, np.array([2.0 ** k]))
    assert tr.value[0] == pytest.approx(cmath.exp(k * path.log_end()), rel=1e-9)
    ray = ray_path(7.0, 1.0, 5.0)
    assert ray.log_end().imag == pytest.approx(7.0)
    with pytest.raises(ValidationError):
        PathSpec([Segment.line(1, 2), Segment.line(3, 4)])
    with pytest.raises(ValidationError):
        Segment.arc(0.5, 1.0, 0, 1).log_point(0.5, 0j)


def test_newton_square_root():
    res = newton_solve(lambda x: np.array([x[0] ** 2 - 4]), np.array([3.0]))
    assert res.converged and res.x[0] == pytest.approx(2.0)
    assert res.trace[-1] < res.trace[0]
    res = newton_solve(lambda x: x ** 2 + 1, np.array([0.5 + 0.5j]))
    assert res.converged and res.x[0] == pytest.approx(1j)


def test_newton_singular_jacobian():
    # x^2 + 1 has no real root: the Jacobian is singular at 0 and the iteration stalls without crashing
    res = newton_solve(lambda x: np.array([x[0] ** 2 + 1]), np.array([0.0]), max_iter=20)
    assert not res.converged
    with pytest.raises(NoConvergence):
        newton_solve(lambda x: np.array([x[0] ** 2 + 1]), np.array([0.0]), max_iter=20, raise_on_failure=True)


def test_newton_rectangular():
    F = lambda x: np.array([x[0] - 1, x[1] + 2, x[0] + x[1] + 1])
    res = newton_solve(F, np.zeros(2))
    assert res.converged and np.allclose(res.x, [1, -2])


def test_jacobians_against_analytic():
    F = lambda x: np.array([np.sin(x[0]) * x[1], np.exp(x[0] - x[1]), x[0] ** 3])
    x = np.array([0.3, -0.7])
    J = np.array([[np.cos(x[0]) * x[1], np.sin(x[0])],
                  [np.exp(x[0] - x[1]), -np.exp(x[0] - x[1])],
                  [3 * x[0] ** 2, 0]])
    assert np.allclose(complex_step_jacobian(F, x), J, atol=1e-14)
    assert np.allclose(forward_difference_jacobian(F, x), J, atol=1e-6)
    xc = x + 0.2j
    Jc = np.array([[np.cos(xc[0]) * xc[1], np.sin(xc[0])],
                   [np.exp(xc[0] - xc[1]), -np.exp(xc[0] - xc[1])],
                   [3 * xc[0] ** 2, 0]])
    assert np.allclose(holomorphic_jacobian(F, xc), Jc, atol=1e-10)


def test_holomorphic_rule_order():
    F = lambda x: np.exp(3 * x)
    x = np.array([0.2 + 0.1j])
    exact = 3 * np.exp(3 * x[0])
    errs = [abs(holomorphic_jacobian(F, x, h)[0, 0] - exact) for h in (0.1, 0.05)]
    assert math.log2(errs[0] / errs[1]) == pytest.approx(4, abs=0.2)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_eig_and_nullspace(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    vals, vecs = eig_checked(A)
    assert np.allclose(A @ vecs, vecs * vals, atol=1e-9)
    B = A[:3]
    ns = nullspace(B)
    assert ns.shape == (4, 1) and np.allclose(B @ ns, 0, atol=1e-10)
    assert condition_number(np.eye(3)) == pytest.approx(1.0)


def test_profiles():
    assert get_tolerances().ode_rtol == 1e-10
    assert set_profile("strict").ode_rtol == 1e-12
    assert override_tolerances(loop_segments=8).loop_segments == 8
    with pytest.raises(ValidationError):
        set_profile("nope")


def test_parallel_map_keeps_order():
    assert parallel_map(lambda x: x * x, range(20), threads=4) == [x * x for x in range(20)]
