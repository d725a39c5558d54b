import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from liessm import GuardError, ValidationError, expm, logm_principal, spectral_norm
from oracles import taylor_expm

small_matrices = arrays(
    np.float64, (3, 3), elements=st.floats(min_value=-1.0, max_value=1.0)
)


def test_expm_zero_is_identity():
    np.testing.assert_allclose(expm(np.zeros((4, 4))), np.eye(4), atol=1e-15)


def test_expm_diagonal():
    d = expm(np.diag([1.0, -2.0]))
    np.testing.assert_allclose(d, np.diag([np.e, np.exp(-2.0)]), rtol=1e-14)


def test_expm_quarter_turn():
    g = np.array([[0.0, -1.0], [1.0, 0.0]])
    np.testing.assert_allclose(
        expm(g * np.pi / 2), np.array([[0.0, -1.0], [1.0, 0.0]]), atol=1e-14
    )


@pytest.mark.parametrize("scale", [0.1, 1.0, 5.0, 10.0])
def test_expm_matches_taylor_oracle(scale, rng):
    a = rng.normal(size=(4, 4))
    a *= scale / spectral_norm(a)
    reference = taylor_expm(a, order=40)
    np.testing.assert_allclose(expm(a), reference, rtol=1e-12, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(small_matrices)
def test_expm_inverse_property(a):
    # exp(A) exp(-A) = I for any finite A
    prod = expm(a) @ expm(-a)
    np.testing.assert_allclose(prod, np.eye(3), atol=1e-12)


def test_expm_rejects_non_finite():
    with pytest.raises(ValidationError):
        expm(np.array([[np.nan, 0.0], [0.0, 0.0]]))


def test_logm_identity():
    np.testing.assert_allclose(logm_principal(np.eye(3)), np.zeros((3, 3)), atol=1e-15)


def test_logm_diagonal():
    m = np.diag([np.exp(0.3), np.exp(-0.5)])
    np.testing.assert_allclose(logm_principal(m), np.diag([0.3, -0.5]), atol=1e-13)


def test_logm_round_trip(rng):
    for _ in range(10):
        a = rng.normal(size=(3, 3))
        a *= 0.1 / spectral_norm(a)
        m = expm(a)
        np.testing.assert_allclose(logm_principal(m), a, atol=1e-12)
        np.testing.assert_allclose(expm(logm_principal(m)), m, rtol=1e-10)


def test_logm_guards_against_far_from_identity():
    with pytest.raises(GuardError):
        logm_principal(np.diag([3.0, 1.0]))


def test_spectral_norm_matches_svd(rng):
    for _ in range(20):
        a = rng.normal(size=(4, 4))
        np.testing.assert_allclose(spectral_norm(a), np.linalg.norm(a, 2), rtol=1e-8)


def test_spectral_norm_edge_cases():
    assert spectral_norm(np.zeros((3, 3))) == 0.0
    assert spectral_norm(np.eye(5)) == pytest.approx(1.0)
    e12 = np.zeros((2, 2))
    e12[0, 1] = 1.0
    assert spectral_norm(e12) == pytest.approx(1.0)
