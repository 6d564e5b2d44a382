import numpy as np
import pytest

from operlab.connection import make_spec
from operlab.errors import LoopHitsSingularity, MatchingInconsistent
from operlab.monodromy_data import (ConnectionMatrices, central_connection, check_matching, forbidden_entries,
                                    frobenius_monodromy_error, matching_drift, monodromy_loop, stokes_check,
                                    stokes_matrix)
from operlab.rep import build_fundamental


def test_matching_drift(a1_spec):
    assert matching_drift(a1_spec, 1, 0.7, 0.4, 0.6) < 1e-6


def test_full_connection_matrix_contains_q_column(a1_spec):
    cm = central_connection(a1_spec, 1, 0.7)
    assert cm.residual < 1e-6
    assert cm.Q.shape == (2, 2)
    assert abs(np.linalg.det(cm.Q)) > 1e-8


def test_stokes_matrix_shape(a2_spec):
    cm = stokes_matrix(a2_spec, 1, 0.6)
    diag, off = stokes_check(cm)
    assert diag < 1e-6 and off < 1e-6
    assert cm.condition["forbidden"]


def test_forbidden_entries():
    mu = np.array([1.0, -1.0])
    assert forbidden_entries(mu, -0.1, 0.1) == [(1, 0)]
    mu3 = np.exp(2j * np.pi * np.arange(3) / 3)
    got = forbidden_entries(mu3, -0.3, -0.1)
    # a strict order on three eigenvalues: three forbidden pairs, never both (a, b) and (b, a)
    assert len(got) == 3
    assert not any((b, a) in got for a, b in got)


def test_regular_point_loop_is_trivial(a2_spec):
    mod = build_fundamental(a2_spec.alg, 1)
    res = monodromy_loop(a2_spec, mod, 1.0 + 0.5j, 0.9 - 0.3j)
    assert res.deviation < 1e-9
    assert res.det_error < 1e-9


def test_generic_singularity_has_monodromy():
    spec = make_spec("A1", 0.4, [0.3], [(1.2, [0.37])])
    mod = build_fundamental(spec.alg, 1)
    res = monodromy_loop(spec, mod, 1.2, 0.5)
    assert res.deviation > 0.1
    # the trace of the residue is zero, so det stays 1
    assert abs(np.linalg.det(res.matrix) - 1) < 1e-9
    with pytest.raises(LoopHitsSingularity):
        monodromy_loop(spec, mod, 1.2, 0.5, radius=1.5)


@pytest.mark.parametrize("sings", [[], [(1.5, [0.3])]])
def test_frobenius_monodromy(sings):
    spec = make_spec("A1", 0.4, [0.3], sings)
    mod = build_fundamental(spec.alg, 1)
    assert frobenius_monodromy_error(spec, mod, 0.6 + 0.1j) < 1e-8


def test_check_matching():
    a = ConnectionMatrices(1, 0.5, 0.4, q_column=np.array([1.0, 2.0]))
    b = ConnectionMatrices(1, 0.5, 0.6, q_column=np.array([1.0, 2.0 + 1e-9]))
    assert check_matching(a, b) < 1e-9
    c = ConnectionMatrices(1, 0.5, 0.6, q_column=np.array([1.0, 2.1]))
    with pytest.raises(MatchingInconsistent):
        check_matching(a, c)
