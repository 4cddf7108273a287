import itertools

import numpy as np
import pytest

from qsl_bounds.lie_engine import (
    ControlSystem,
    GroupKind,
    adjoint_orbit_dim,
    algebra_dims,
    orthogonal_complement,
    standard_basis,
    standard_controls,
)
from qsl_bounds.tightness import (
    EXPECTED_NOT_TIGHT,
    INDETERMINATE,
    TIGHT_GUARANTEED,
    classify_tightness,
    dimension_criterion,
    so_degeneracy_analysis,
    su3_root_analysis,
)

from conftest import SX, SZ, random_hermitian


def _setup(kind, drift):
    k = standard_basis(kind)
    p = orthogonal_complement(k)
    return ControlSystem(np.asarray(drift, dtype=complex), tuple(standard_controls(kind))), k, p


def test_dimension_criterion_examples():
    sys2, k, p = _setup(GroupKind("SO", 2), SZ)
    assert dimension_criterion(sys2, k, p) == (True, 0, 0)
    for drift in (np.diag([1.0, 0, -1]), np.diag([1.0, -0.5, -0.5])):
        holds, lhs, rhs = dimension_criterion(*_setup(GroupKind("SO", 3), drift))
        assert rhs == -1 and not holds
    holds, lhs, rhs = dimension_criterion(*_setup(GroupKind("Sp", 4), np.diag([1.0, -1, 1, -1])))
    assert rhs == 6
    # rank oracle: centralizer of a diagonal drift inside sp(2), counted directly
    k = standard_basis(GroupKind("Sp", 4))
    h = np.diag([1.0, -1, 1, -1])
    coeffs = np.array([np.concatenate([(h @ b - b @ h).real.ravel(), (h @ b - b @ h).imag.ravel()]) for b in k.elements])
    assert lhs == len(k) - np.linalg.matrix_rank(coeffs, tol=1e-9)


def test_so_degeneracy_examples():
    assert so_degeneracy_analysis(np.diag([1.0, 0, -1])) == (0, 3)
    assert so_degeneracy_analysis(np.diag([1.0, -0.5, -0.5])) == (1, 2)
    assert so_degeneracy_analysis(np.zeros((4, 4))) == (6, 0)


def test_su3_root_examples():
    r = su3_root_analysis(np.diag([1.0, 0, -1]))
    assert (r.cond1_lhs, r.cond2_lhs, r.degenerate) == (1.0, 1.0, False)
    assert su3_root_analysis(np.diag([1.0, -0.5, -0.5])).degenerate
    assert su3_root_analysis(np.zeros((3, 3))).degenerate
    with pytest.raises(ValueError):
        su3_root_analysis(np.zeros((2, 2)))


def test_classify_examples():
    assert classify_tightness(*_verdict_args(GroupKind("SO", 2), SZ)).status == TIGHT_GUARANTEED
    assert classify_tightness(*_verdict_args(GroupKind("SO", 3), np.diag([1.0, -0.5, -0.5]))).status == EXPECTED_NOT_TIGHT
    assert classify_tightness(*_verdict_args(GroupKind("SO", 3), np.diag([1.0, 0, -1]))).status == INDETERMINATE


def _verdict_args(kind, drift):
    system, k, p = _setup(kind, drift)
    return system, kind, k, p


def _random_kind(rng, n):
    choices = [GroupKind("SO", n)] + [GroupKind("SU_pq", n, p, n - p) for p in range(1, n // 2 + 1)]
    if n % 2 == 0 and n >= 4:
        choices.append(GroupKind("Sp", n))
    return choices[rng.integers(len(choices))]


def test_inequality_never_violated(rng):
    for trial in range(100):
        n = 2 + trial % 5
        kind = _random_kind(rng, n)
        drift = random_hermitian(rng, n)
        if trial % 4 == 0:
            lam = rng.integers(-2, 3, n).astype(float)
            drift = np.diag(lam - lam.mean())
        holds, lhs, rhs = dimension_criterion(*_setup(kind, drift))
        assert lhs >= rhs
        dk, dp = algebra_dims(kind)
        assert rhs == dk - dp + 1


def test_table_ii_rhs_closed_forms():
    for n in range(2, 9):
        dk, dp = algebra_dims(GroupKind("SO", n))
        assert dk - dp + 1 == 2 - n
        if n % 2 == 0:
            dk, dp = algebra_dims(GroupKind("Sp", n))
            assert dk - dp + 1 == 2 + n
        for p in range(1, n // 2 + 1):
            dk, dp = algebra_dims(GroupKind("SU_pq", n, p, n - p))
            assert dk - dp + 1 == (p - (n - p)) ** 2


def test_permutation_and_scale_invariance(rng):
    for lam in ([1.0, 0, -1], [1.0, -0.5, -0.5], [2.0, 2.0, -4.0], [0.3, -0.1, -0.2]):
        base_m = so_degeneracy_analysis(np.diag(lam))
        base_d = su3_root_analysis(np.diag(lam)).degenerate
        for perm in itertools.permutations(lam):
            for c in (1.0, -2.5, 0.01):
                h = c * np.diag(perm)
                assert so_degeneracy_analysis(h) == base_m
                assert su3_root_analysis(h).degenerate == base_d


def test_orbit_dim_cross_module(rng):
    for n in range(2, 7):
        so = standard_basis(GroupKind("SO", n))
        for _ in range(5):
            lam = rng.integers(-2, 3, n).astype(float)
            _, orbit = so_degeneracy_analysis(np.diag(lam - lam.mean()))
            assert orbit == adjoint_orbit_dim(np.diag(lam - lam.mean()), so)


def test_reasons_are_structured():
    v = classify_tightness(*_verdict_args(GroupKind("SO", 3), np.diag([1.0, -0.5, -0.5])))
    names = [r["criterion"] for r in v.reasons]
    assert names[:3] == ["dimension_counting", "so_degeneracy", "su3_roots"]
    v = classify_tightness(*_verdict_args(GroupKind("SO", 2), SX))
    # drift inside k: nothing moves, but the verdict is still well defined
    assert v.status in (TIGHT_GUARANTEED, INDETERMINATE)
