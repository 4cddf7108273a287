import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsl_bounds.grape import haar_random_su
from qsl_bounds.matrix_core import (
    MatrixError,
    eig_hermitian,
    expm_skew,
    killing_inner,
    killing_norm,
    orthonormalize,
    remove_trace,
    to_real_vector,
    unitarity_defect,
)

from conftest import SX, SY, SZ, random_hermitian, taylor_expm


def test_killing_inner_sigma_z():
    assert killing_inner(1j * SZ, 1j * SZ) == pytest.approx(8.0, rel=1e-15)
    assert killing_norm(1j * SZ) == pytest.approx(2 * np.sqrt(2), rel=1e-15)


def test_killing_inner_zero_and_orthogonal(rng):
    y = 1j * random_hermitian(rng, 2)
    assert killing_inner(np.zeros((2, 2), complex), y) == 0.0
    assert killing_inner(1j * SX, 1j * SZ) == 0.0


def test_killing_inner_dimension_mismatch():
    with pytest.raises(MatrixError):
        killing_inner(np.zeros((2, 2), complex), np.zeros((3, 3), complex))
    with pytest.raises(MatrixError):
        killing_inner(1j * SZ, 1j * SZ, n=3)


def test_killing_matches_real_vector_dot(rng):
    x, y = (1j * random_hermitian(rng, 4) for _ in range(2))
    assert killing_inner(x, y) == pytest.approx(float(to_real_vector(x) @ to_real_vector(y)), rel=1e-12)


def test_eig_hermitian_examples(rng):
    np.testing.assert_allclose(eig_hermitian(SZ).eigenvalues, [-1, 1], atol=1e-15)
    np.testing.assert_allclose(eig_hermitian(np.diag([1, -0.5, -0.5])).eigenvalues, [-0.5, -0.5, 1], atol=1e-15)
    h = random_hermitian(rng, 4, traceless=False)
    es = eig_hermitian(h)
    v = es.eigenvectors
    assert np.linalg.norm(v @ np.diag(es.eigenvalues) @ v.conj().T - h) <= 1e-10 * max(1, np.linalg.norm(h))
    assert np.linalg.norm(v.conj().T @ v - np.eye(4)) <= 1e-10
    assert np.all(np.diff(es.eigenvalues) >= 0)
    assert es.eigenvalues.sum() == pytest.approx(np.trace(h).real, abs=1e-10 * max(1, np.linalg.norm(h)))


def test_eig_hermitian_rejects_non_hermitian():
    with pytest.raises(MatrixError):
        eig_hermitian(np.array([[0, 1], [0, 0]], dtype=complex))


def test_expm_skew_examples():
    np.testing.assert_allclose(expm_skew(np.zeros((3, 3), complex)), np.eye(3), atol=1e-15)
    np.testing.assert_allclose(expm_skew(1j * np.pi * SZ), -np.eye(2), atol=1e-14)
    u = expm_skew(1j * SX * np.pi / 4)
    np.testing.assert_allclose(np.abs(u), np.full((2, 2), np.sqrt(0.5)), atol=1e-14)
    assert np.linalg.norm(u - taylor_expm(1j * SX * np.pi / 4)) <= 1e-10


def test_expm_skew_against_taylor_oracle(rng):
    for n in (2, 3, 5):
        a = 1j * random_hermitian(rng, n, traceless=False)
        u = expm_skew(a)
        assert np.linalg.norm(u - taylor_expm(a)) <= 1e-10
        assert unitarity_defect(u) <= 1e-10
        assert abs(np.linalg.det(u) - np.exp(np.trace(a))) <= 1e-10


def test_expm_skew_rejects_hermitian():
    with pytest.raises(MatrixError):
        expm_skew(SZ)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), s=st.floats(-3, 3), t=st.floats(-3, 3), n=st.integers(2, 5))
def test_expm_group_laws(seed, s, t, n):
    a = 1j * random_hermitian(np.random.default_rng(seed), n)
    assert np.linalg.norm(expm_skew(a) @ expm_skew(-a) - np.eye(n)) <= 1e-9
    assert np.linalg.norm(expm_skew(a * s) @ expm_skew(a * t) - expm_skew(a * (s + t))) <= 1e-9


def test_ad_invariance_of_killing_form(rng):
    for trial in range(100):
        n = 2 + trial % 4
        a = 1j * random_hermitian(rng, n)
        u = haar_random_su(n, seed=trial)
        conj = u.conj().T @ a @ u
        ref = killing_inner(a, a)
        assert abs(killing_inner(conj, conj) - ref) <= 1e-8 * ref


def _rank_oracle(mats):
    vecs = np.array([to_real_vector(m) for m in mats])
    return np.linalg.matrix_rank(vecs, tol=1e-10 * np.linalg.norm(vecs, 2))


def test_orthonormalize_examples():
    assert len(orthonormalize([1j * SX, 2j * SX], 2)) == 1
    assert len(orthonormalize([1j * SX, 1j * SY, 1j * SZ], 2)) == 3
    basis = orthonormalize([1j * SX + 1j * SY, 1j * SY], 2)
    assert len(basis) == _rank_oracle([1j * SX + 1j * SY, 1j * SY]) == 2
    assert abs(killing_inner(basis[0], basis[1])) <= 1e-10
    assert len(orthonormalize([], 3)) == 0


def test_orthonormalize_span_and_gram(rng):
    mats = [1j * random_hermitian(rng, 3) for _ in range(4)]
    mats.append(mats[0] - 2 * mats[2])
    basis = orthonormalize(mats, 3)
    assert len(basis) == _rank_oracle(mats) == 4
    gram = np.array([[killing_inner(a, b) for b in basis] for a in basis])
    np.testing.assert_allclose(gram, np.eye(4), atol=1e-10)
    # every input lies in the span of the output
    b = np.array([to_real_vector(x) for x in basis])
    for m in mats:
        r = to_real_vector(m)
        assert np.linalg.norm(r - b.T @ (b @ r)) <= 1e-10 * np.linalg.norm(r)


def test_remove_trace_warns(caplog):
    with caplog.at_level(logging.WARNING):
        out = remove_trace(np.eye(2, dtype=complex) + SZ, "drift")
    assert "not traceless" in caplog.text
    np.testing.assert_allclose(out, SZ)
    caplog.clear()
    with caplog.at_level(logging.WARNING):
        out = remove_trace(SZ.copy())
    assert caplog.text == ""
    assert out is not None and np.array_equal(out, SZ)
