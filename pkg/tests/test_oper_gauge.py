import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from operlab.connection import coefficient_element, make_spec
from operlab.errors import AssumptionViolated, ShapeViolation
from operlab.liealg_core import build_algebra
from operlab.oper_gauge import (Oper, RatFun, bracket, canonical_form, check_assumptions,
                                ffh_normal_form, gauge_apply, is_canonical, oper_from_spec, random_gauge,
                                random_spec)
from operlab.rep import build_fundamental, ensure_normalized


def _alg(name):
    alg = build_algebra(name)
    ensure_normalized(alg)
    return alg


def test_a1_riccati():
    """f + beta h/2 reduces to (beta^2/4 + x beta'/2) e."""
    alg = _alg("A1")
    lie = alg.lie
    h, e = lie.theta_vee, lie.e_root[(1,)]
    b = RatFun(lie.g.dim, [0.3 * h / 2, 0.2 * h / 2], {1.5: [0.7 * h / 2]})
    can, _ = canonical_form(Oper(alg, b))
    assert is_canonical(can)
    for x in (0.4, -2.0 + 1j, 3.3):
        beta = 0.3 + 0.2 * x + 0.7 / (x - 1.5)
        dbeta = 0.2 - 0.7 / (x - 1.5) ** 2
        want = (beta ** 2 / 4 + x * dbeta / 2) * e
        assert np.allclose(can.b(x), want, atol=1e-12)


@pytest.mark.parametrize("name", ["A2", "D4", "D3^2"])
def test_canonical_is_idempotent(name, rng):
    alg = _alg(name)
    L = oper_from_spec(random_spec(alg, 1, rng)) if alg.r == 1 else oper_from_spec(make_spec(alg, 0.4, [0.2, 0.11]))
    can, g = canonical_form(L)
    again, g2 = canonical_form(can)
    assert g2.is_identity or all(y.scale() < 1e-10 for y in g2.factors)
    assert again.distance(can) < 1e-10
    assert gauge_apply(g, L).distance(can) < 1e-10


@pytest.mark.parametrize("name", ["A1", "A2", "A3"])
def test_gauge_inverse_and_group_law(name, rng):
    alg = _alg(name)
    L = oper_from_spec(random_spec(alg, 2, rng))
    poles = list(L.b.poles)
    g1 = random_gauge(alg, rng, poles=poles[:1])
    g2 = random_gauge(alg, rng, poles=poles[1:], degree=0)
    assert gauge_apply(g1.inverse(), gauge_apply(g1, L)).distance(L) < 1e-9
    seq = gauge_apply(g1, gauge_apply(g2, L))
    assert gauge_apply(g1 * g2, L).distance(seq) < 1e-9
    # a single exp(y) with the same action
    assert gauge_apply((g1 * g2).collapse(alg), L).distance(seq) < 1e-8
    x = 0.37 - 0.2j
    assert np.allclose((g1 * g2).value(alg, x), g1.value(alg, x) @ g2.value(alg, x), atol=1e-12)


@pytest.mark.parametrize("name", ["A2", "D3^2"])
def test_gauge_matches_ode_transformation(name, rng):
    """A' = G A G^-1 - G' G^-1 so that G Psi is flat for the new oper."""
    alg = _alg(name)
    spec = random_spec(alg, 1, rng) if alg.r == 1 else make_spec(alg, 0.4, [0.2, 0.11])
    L = oper_from_spec(spec)
    g = random_gauge(alg, rng, poles=list(L.b.poles), degree=1)
    L2 = gauge_apply(g, L)
    mod = build_fundamental(alg, 1)
    z, lam, eps = 0.6 + 0.3j, 0.9, 1e-6
    G = g.value(alg, z, mod)
    dG = (g.value(alg, z + eps, mod) - g.value(alg, z - eps, mod)) / (2 * eps)
    A = mod.rep(L.coefficient(z, lam))
    want = G @ A @ np.linalg.inv(G) - dG @ np.linalg.inv(G)
    assert np.abs(mod.rep(L2.coefficient(z, lam)) - want).max() < 1e-7 * max(1, np.abs(want).max())


def test_oper_from_spec_matches_connection():
    spec = make_spec("A2", 0.4, [0.31, 0.17], [(1.2 + 0.3j, [0.2, -0.1, 0.05])])
    L = oper_from_spec(spec)
    for z in (0.3, 2.0 - 1j):
        assert np.allclose(L.coefficient(z, 0.7), coefficient_element(spec, z, 0.7), atol=1e-12)


@pytest.mark.parametrize("name, J", [("A1", 1), ("A2", 1), ("A2", 2), ("A3", 1)])
def test_normal_form_round_trip(name, J, rng):
    alg = _alg(name)
    spec = random_spec(alg, J, rng)
    can = canonical_form(oper_from_spec(spec))[0]
    res = ffh_normal_form(can, spec.ell)
    assert res.residual < 1e-9
    back = canonical_form(oper_from_spec(res.spec))[0]
    assert back.distance(can) < 1e-8 * max(1, can.b.scale())
    assert len(res.reports) == J and all(r.gap < 1e-8 for r in res.reports)


def test_normal_form_without_singularities():
    alg = _alg("A2")
    spec = make_spec(alg, 0.4, [0.31, 0.17])
    can = canonical_form(oper_from_spec(spec))[0]
    res = ffh_normal_form(can, spec.ell)
    assert res.spec.J == 0 and res.residual < 1e-12


def test_assumption_violations(rng):
    alg = _alg("A1")
    lie = alg.lie
    dim = lie.g.dim
    e = lie.e_root[(1,)]
    spec = random_spec(alg, 1, rng)
    can = canonical_form(oper_from_spec(spec))[0]
    check_assumptions(can, spec.ell)
    u = list(can.b.poles)[0]
    # a double pole in degree 1 changes the local residue class, keeping the value at 0
    bad3 = Oper(alg, can.b + RatFun(dim, poly=[-0.3 * e / u ** 2], poles={u: [0 * e, 0.3 * e]}), can.k)
    with pytest.raises(AssumptionViolated) as info:
        check_assumptions(bad3, spec.ell)
    assert info.value.assumption == 3
    bad2 = Oper(alg, can.b + RatFun(dim, poly=[0 * e, 0.1 * e]), can.k)
    with pytest.raises(AssumptionViolated) as info:
        check_assumptions(bad2, spec.ell)
    assert info.value.assumption == 2
    bad1 = Oper(alg, can.b + RatFun(dim, poly=[0.05 * e]), can.k)
    with pytest.raises(AssumptionViolated) as info:
        check_assumptions(bad1, spec.ell)
    assert info.value.assumption == 1
    with pytest.raises(ShapeViolation):
        ffh_normal_form(oper_from_spec(spec), spec.ell)


def test_oper_shape_checks():
    alg = _alg("A2")
    lie = alg.lie
    with pytest.raises(ShapeViolation):
        Oper(alg, RatFun.constant(lie.f_circ))
    zero = np.zeros(_alg("D3^2").lie.g.dim)
    ext = make_spec("D3^2", 0.4, [0.2, 0.11], [(1.0, [zero, zero])], extended=True)
    with pytest.raises(ShapeViolation):
        oper_from_spec(ext)


_coef = st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False)


@st.composite
def ratfuns(draw, dim=3):
    poly = [[draw(_coef) for _ in range(dim)] for _ in range(draw(st.integers(1, 3)))]
    poles = {}
    for u in draw(st.lists(st.sampled_from([1.0, -1.5 + 0.5j, 2j]), unique=True, max_size=2)):
        poles[u] = [[draw(_coef) for _ in range(dim)] for _ in range(draw(st.integers(1, 2)))]
    return RatFun(dim, poly, poles)


@settings(max_examples=40, deadline=None)
@given(ratfuns(), ratfuns(), st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_ratfun_algebra(f, g, x):
    if min(abs(x - 1.0), abs(x - (-1.5 + 0.5j)), abs(x - 2j)) < 0.2:
        x = x + 5
    assert np.allclose((f + g)(x), f(x) + g(x))
    assert np.allclose((f * (0.5 - 1j))(x), (0.5 - 1j) * f(x))
    assert np.allclose(f.times_x()(x), x * f(x))
    eps = 1e-6
    num = (f(x + eps) - f(x - eps)) / (2 * eps)
    assert np.allclose(f.derivative()(x), num, atol=1e-5 * max(1, np.abs(num).max()))
    # cross product as a bilinear map, checked pointwise
    outer = lambda A, B: np.cross(A[:, None, :], B[None, :, :])
    assert np.allclose(f.bilinear(g, outer, 3)(x), np.cross(f(x), g(x)), atol=1e-8 * max(1, f.scale() * g.scale()))
    assert RatFun.from_json(f.to_json()).distance(f) == 0


def test_bracket_of_ratfuns(rng):
    alg = _alg("A2")
    g = alg.lie.g
    f1 = RatFun(g.dim, [rng.normal(size=g.dim)], {0.5: [rng.normal(size=g.dim)]})
    f2 = RatFun(g.dim, [rng.normal(size=g.dim), rng.normal(size=g.dim)])
    x = 1.7
    assert np.allclose(bracket(alg, f1, f2)(x), g.bracket(f1(x), f2(x)))
