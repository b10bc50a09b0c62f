import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_hermitian, random_symmetric
from holocrit.linalg import (
    DEGENERATE,
    CholeskyError,
    RngStream,
    batch_index,
    cholesky,
    complex_normal,
    from_hs_vector,
    hermitian_eigenvalues,
    hermitian_eigh,
    hs_to_matrices,
    hs_vector,
    jet_dim,
    matrix_index,
    sample_haar_unitaries,
    sample_haar_unitary,
    sample_jet_with_covariance,
    sample_standard_jet,
    sample_standard_jets,
)


def test_jet_dimensions():
    assert [jet_dim(m) for m in range(1, 5)] == [2, 4, 7, 11]


def test_hs_vector_diagonal_matrix():
    assert np.allclose(hs_vector(np.diag([1, 2])), [1, 0, 2])


def test_hs_vector_off_diagonal_weight():
    assert np.allclose(hs_vector(np.array([[0, 1], [1, 0]])), [0, math.sqrt(2), 0])


def test_hs_vector_is_an_isometry(rng):
    h = random_symmetric(rng, 4)
    v = hs_vector(h)
    assert np.isclose(np.vdot(v, v).real, np.sum(np.abs(h) ** 2))
    assert np.allclose(from_hs_vector(v, 4), h)


def test_hs_vector_rejects_non_symmetric():
    with pytest.raises(ValueError):
        hs_vector(np.array([[0, 1], [2, 0]]))


def test_batch_conversion_matches_single(rng):
    hs = [random_symmetric(rng, 3) for _ in range(5)]
    coords = np.array([hs_vector(h) for h in hs])
    assert np.allclose(hs_to_matrices(coords, 3), np.array(hs))


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
def test_jacobi_matches_lapack(n, seed):
    a = random_hermitian(np.random.default_rng(seed), n, scale=3.0)
    w, v = hermitian_eigh(a)
    assert np.allclose(w, np.linalg.eigvalsh(a), atol=1e-10)
    assert np.allclose(v @ np.diag(w) @ v.conj().T, a, atol=1e-10)
    assert np.allclose(v.conj().T @ v, np.eye(n), atol=1e-12)


def test_jacobi_diagonal_input():
    assert np.allclose(hermitian_eigenvalues(np.diag([3.0, -1.0, 2.0])), [-1, 2, 3])


def test_jacobi_rejects_non_hermitian():
    with pytest.raises(ValueError):
        hermitian_eigh(np.array([[0, 1], [2, 0]], dtype=complex))


def test_matrix_index_examples():
    assert matrix_index(np.diag([-1.0, 2.0, -3.0])) == 2
    assert matrix_index(np.eye(3)) == 0
    assert matrix_index(np.diag([1.0, 0.0])) is DEGENERATE
    assert not DEGENERATE


def test_matrix_index_invariant_under_unitary_conjugation(rng):
    u = sample_haar_unitary(rng, 4)
    a = u @ np.diag([-2.0, -0.5, 1.0, 3.0]) @ u.conj().T
    assert matrix_index(a) == 2


def test_batch_index_marks_degenerate():
    eigs = np.array([[-1.0, 2.0], [0.0, 1.0], [-1.0, -2.0]])
    assert batch_index(eigs).tolist() == [1, -1, 2]


def test_cholesky_matches_numpy(rng):
    a = random_hermitian(rng, 5)
    a = a @ a.conj().T + np.eye(5)
    low = cholesky(a)
    assert np.allclose(low, np.linalg.cholesky(a))


def test_cholesky_names_failing_pivot():
    with pytest.raises(CholeskyError) as exc:
        cholesky(np.diag([1.0, 2.0, -1.0]))
    assert exc.value.pivot == 2


def test_rng_stream_reproducible():
    a = RngStream(7, 3).generator().standard_normal(5)
    b = RngStream(7, 3).generator().standard_normal(5)
    c = RngStream(7, 4).generator().standard_normal(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_complex_normal_moments():
    z = complex_normal(np.random.default_rng(1), 200000)
    assert abs(np.mean(np.abs(z) ** 2) - 1) < 0.01
    assert abs(np.mean(z * z)) < 0.01


def test_standard_jets_shape_and_scale():
    v = sample_standard_jets(np.random.default_rng(2), 2, 100000)
    assert v.shape == (100000, 4)
    assert np.allclose(np.mean(np.abs(v) ** 2, axis=0), 1, atol=0.02)


def test_single_jet_helpers():
    jet = sample_standard_jet(RngStream(1), 3)
    assert jet.h.shape == (3, 3) and np.allclose(jet.h, jet.h.T)
    lam = np.diag([4.0, 4.0, 4.0, 9.0])
    jet2 = sample_jet_with_covariance(RngStream(2), lam)
    assert jet2.h.shape == (2, 2)


def test_covariance_sampling_reproduces_lambda():
    from holocrit.linalg import sample_jets_with_covariance

    lam = np.array([[2.0, 0.5j, 0, 0], [-0.5j, 1.0, 0, 0], [0, 0, 3.0, 0.2], [0, 0, 0.2, 1.0]])
    v = sample_jets_with_covariance(np.random.default_rng(3), cholesky(lam), 400000)
    emp = v.T @ v.conj() / len(v)
    assert np.allclose(emp, lam, atol=0.03)


def test_haar_unitaries_are_unitary_and_uniform():
    u = sample_haar_unitaries(np.random.default_rng(4), 3, 50000)
    eye = np.einsum("bij,bkj->bik", u, u.conj())
    assert np.allclose(eye, np.eye(3), atol=1e-12)
    # E|U_11|^2 = 1/m and E|U_11|^4 = 2/(m(m+1))
    p = np.abs(u[:, 0, 0]) ** 2
    assert abs(p.mean() - 1 / 3) < 0.005
    assert abs((p * p).mean() - 2 / 12) < 0.005
