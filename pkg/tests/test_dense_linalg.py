import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import p1_eigenvalues
from periodic_heat.dense_linalg import (
    NotPositiveDefiniteError,
    cholesky,
    generalized_eig,
    matexp,
    two_norm,
)
from periodic_heat.fem_space import assemble


def random_spd(rng, n, cond=1e3):
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    eig = np.geomspace(1.0, cond, n)
    a = (q * eig) @ q.T
    return 0.5 * (a + a.T)


def test_cholesky_small():
    g = cholesky([[4.0, 2.0], [2.0, 5.0]])
    np.testing.assert_allclose(g, [[2.0, 0.0], [1.0, 2.0]])


def test_cholesky_identity():
    np.testing.assert_array_equal(cholesky(np.eye(5)), np.eye(5))


def test_cholesky_indefinite_reports_pivot():
    with pytest.raises(NotPositiveDefiniteError) as info:
        cholesky([[1.0, 2.0], [2.0, 1.0]])
    assert info.value.pivot == 2
    assert "pivot 2" in str(info.value)


def test_cholesky_rejects_tiny_pivot():
    a = np.array([[1.0, 1.0], [1.0, 1.0 + 1e-16]])
    with pytest.raises(NotPositiveDefiniteError):
        cholesky(a)


def test_cholesky_rejects_nonsymmetric():
    with pytest.raises(ValueError, match="symmetric"):
        cholesky([[2.0, 1.0], [0.0, 2.0]])


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 25), seed=st.integers(0, 2 ** 31 - 1))
def test_cholesky_reconstructs(n, seed):
    a = random_spd(np.random.default_rng(seed), n)
    g = cholesky(a)
    assert np.all(np.triu(g, 1) == 0)
    assert np.max(np.abs(g @ g.T - a)) <= 1e-13 * two_norm(a)


def test_generalized_eig_scalar():
    dec = generalized_eig([[2.0]], [[1.0]])
    np.testing.assert_allclose(dec.eigenvalues, [2.0])
    np.testing.assert_allclose(np.abs(dec.eigenvectors), [[1.0]])


def test_generalized_eig_fem_quarter_mesh():
    fem = assemble(4)
    dec = generalized_eig(fem.stiffness, fem.mass)
    np.testing.assert_allclose(dec.eigenvalues, p1_eigenvalues(4), rtol=1e-12)
    # closed form (6/h^2)(1 - cos(pi h))/(2 + cos(pi h)) at h = 1/4
    assert dec.mu_min == pytest.approx(10.3866420, abs=1e-7)


@pytest.mark.parametrize("ne", [8, 33, 128])
def test_generalized_eig_matches_closed_form(ne):
    fem = assemble(ne)
    dec = generalized_eig(fem.stiffness, fem.mass)
    np.testing.assert_allclose(dec.eigenvalues, p1_eigenvalues(ne), rtol=1e-10)
    assert dec.mu_min >= math.pi ** 2


def test_identical_pencil_has_unit_eigenvalues():
    a = random_spd(np.random.default_rng(3), 7)
    dec = generalized_eig(a, a)
    np.testing.assert_allclose(dec.eigenvalues, 1.0, rtol=1e-12)


def test_generalized_eig_propagates_cholesky_failure():
    with pytest.raises(NotPositiveDefiniteError):
        generalized_eig(np.eye(2), [[1.0, 2.0], [2.0, 1.0]])


def test_generalized_eig_size_mismatch():
    with pytest.raises(ValueError):
        generalized_eig(np.eye(2), np.eye(3))


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 20), seed=st.integers(0, 2 ** 31 - 1))
def test_generalized_eig_invariants(n, seed):
    rng = np.random.default_rng(seed)
    d, l = random_spd(rng, n), random_spd(rng, n, cond=50)
    dec = generalized_eig(d, l)
    v, mu = dec.eigenvectors, dec.eigenvalues
    assert np.all(np.diff(mu) >= 0)
    assert two_norm(d @ v - l @ v * mu) <= 1e-10 * two_norm(d)
    np.testing.assert_allclose(v.T @ l @ v, np.eye(n), atol=1e-10)


def test_two_norm_examples():
    assert two_norm(np.eye(4)) == pytest.approx(1.0)
    assert two_norm(np.diag([3.0, -4.0])) == pytest.approx(4.0)
    assert two_norm([[0.0, 1.0], [0.0, 0.0]]) == pytest.approx(1.0)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 15), seed=st.integers(0, 2 ** 31 - 1))
def test_two_norm_orthogonal_invariance(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    assert two_norm(q @ a @ q.T) == pytest.approx(two_norm(a), rel=1e-10)


def test_matexp_examples():
    np.testing.assert_allclose(matexp(np.zeros((3, 3))), np.eye(3), atol=1e-16)
    np.testing.assert_allclose(matexp(np.diag([1.0, -1.0])), np.diag([math.e, 1 / math.e]), rtol=1e-14)
    np.testing.assert_allclose(matexp([[0.0, 1.0], [0.0, 0.0]]), [[1.0, 1.0], [0.0, 1.0]], atol=1e-15)


def test_matexp_overflow():
    with pytest.raises(OverflowError):
        matexp(np.array([[1000.0]]))
    with pytest.raises(OverflowError):
        matexp(np.array([[np.inf]]))


@pytest.mark.parametrize("scale", [1e-3, 0.1, 1.0, 4.0, 30.0, 500.0])
def test_matexp_against_scipy(scale):
    a = np.random.default_rng(11).standard_normal((9, 9))
    a *= scale / np.linalg.norm(a, 1)
    ref = scipy.linalg.expm(a)
    np.testing.assert_allclose(matexp(a), ref, rtol=1e-11, atol=1e-13 * np.abs(ref).max())


@pytest.mark.parametrize("nu", [0.1, 1.0, 10.0])
@pytest.mark.parametrize("t", [0.25, 1.0])
@pytest.mark.parametrize("n", [1, 4, 12, 20])
def test_eigen_propagator_matches_matexp(nu, t, n):
    rng = np.random.default_rng(n)
    d, l = random_spd(rng, n, cond=20), random_spd(rng, n, cond=5)
    dec = generalized_eig(d, l)
    v, mu = dec.eigenvectors, dec.eigenvalues
    eig_path = (v * np.exp(-nu * t * mu)) @ v.T @ l
    lit = matexp(-nu * t * np.linalg.solve(l, d))
    np.testing.assert_allclose(eig_path, lit, atol=1e-8)
