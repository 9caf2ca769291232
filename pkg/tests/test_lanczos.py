import numpy as np
import pytest

from specden import BudgetLedger, DiagonalOperator, SeededStream, lanczos, tridiag_eig
from specden.chebyshev import TBAR_SCALE, cheb_normalized
from specden.lanczos import (
    LanczosError,
    TridiagonalFactorization,
    magnitude_order,
    polynomial_identity_check,
)
from specden.randgen import unit_sphere_vector

from conftest import random_symmetric


def test_hand_two_by_two_recurrence():
    A = DiagonalOperator(np.array([1.0, -1.0]))
    g = np.array([1.0, 1.0]) / np.sqrt(2.0)
    fact = lanczos(A, g, 2)
    np.testing.assert_allclose(fact.alpha, [0.0, 0.0], atol=1e-14)
    np.testing.assert_allclose(fact.eta, [1.0], atol=1e-14)
    np.testing.assert_allclose(fact.tridiagonal(), [[0.0, 1.0], [1.0, 0.0]], atol=1e-14)


def test_eigenvector_start_breaks_down_immediately():
    A = DiagonalOperator(np.array([3.0, 2.0, 1.0]))
    g = np.array([0.0, 1.0, 0.0])
    ledger = BudgetLedger()
    fact = lanczos(A, g, 3, ledger=ledger)
    assert fact.m_effective == 1
    assert fact.alpha[0] == pytest.approx(2.0)
    # Iterations after breakdown are not charged.
    assert ledger.total == 1


def test_full_run_reproduces_spectrum():
    A, spectrum = random_symmetric(30, seed=4)
    g = unit_sphere_vector(30, SeededStream(4))
    fact = lanczos(A, g, 30)
    ritz = np.sort(np.linalg.eigvalsh(fact.tridiagonal()))
    np.testing.assert_allclose(ritz, np.sort(spectrum), atol=1e-8)


def test_factorization_invariants():
    A, _ = random_symmetric(25, seed=8)
    g = unit_sphere_vector(25, SeededStream(8))
    fact = lanczos(A, g, 15)
    m = fact.m_effective
    np.testing.assert_allclose(fact.Q.T @ fact.Q, np.eye(m), atol=1e-8)
    np.testing.assert_allclose(fact.Q[:, 0], g)
    projected = fact.Q.T @ A.to_dense() @ fact.Q
    assert np.linalg.norm(projected - fact.tridiagonal()) <= 1e-6


def test_input_validation():
    A = DiagonalOperator(np.ones(4))
    with pytest.raises(LanczosError):
        lanczos(A, np.ones(4), 2)
    with pytest.raises(LanczosError):
        lanczos(A, np.eye(4)[0], 5)


def test_budget_is_exactly_m():
    A, _ = random_symmetric(20, seed=1)
    g = unit_sphere_vector(20, SeededStream(1))
    ledger = BudgetLedger()
    lanczos(A, g, 12, ledger=ledger)
    assert ledger.counts == {"lanczos": 12}


def test_tridiag_eig_hand_case():
    fact = TridiagonalFactorization(
        alpha=np.zeros(2), eta=np.array([1.0]), Q=np.eye(2), m_requested=2
    )
    ritz = tridiag_eig(fact)
    np.testing.assert_allclose(ritz.values, [1.0, -1.0], atol=1e-14)
    np.testing.assert_allclose(ritz.weights, [0.5, 0.5], atol=1e-14)


def test_tridiag_eig_diagonal_case():
    fact = TridiagonalFactorization(
        alpha=np.array([3.0, 2.0, 1.0]),
        eta=np.zeros(2),
        Q=np.eye(3),
        m_requested=3,
    )
    ritz = tridiag_eig(fact)
    np.testing.assert_allclose(ritz.values, [3.0, 2.0, 1.0])
    np.testing.assert_allclose(ritz.weights, [1.0, 0.0, 0.0], atol=1e-14)


def test_tridiag_eig_residuals_and_weight_sum():
    rng = np.random.default_rng(17)
    fact = TridiagonalFactorization(
        alpha=rng.uniform(-1, 1, 50),
        eta=rng.uniform(0.01, 1, 49),
        Q=np.eye(50),
        m_requested=50,
    )
    ritz = tridiag_eig(fact)
    T = fact.tridiagonal()
    for j in range(50):
        assert (
            np.linalg.norm(T @ ritz.vectors[:, j] - ritz.values[j] * ritz.vectors[:, j])
            <= 1e-10
        )
    assert ritz.weights.sum() == pytest.approx(1.0, abs=1e-10)


def test_magnitude_sort_is_descending_with_sign_tiebreak():
    order = magnitude_order(np.array([0.5, -1.0, 1.0, -0.5]))
    np.testing.assert_array_equal(np.array([1.0, -1.0, 0.5, -0.5]), np.array([0.5, -1.0, 1.0, -0.5])[order])


def test_ritz_magnitudes_interlace_true_spectrum():
    A, spectrum = random_symmetric(40, seed=13)
    g = unit_sphere_vector(40, SeededStream(13))
    ritz = tridiag_eig(lanczos(A, g, 18))
    true_sorted = np.sort(np.abs(spectrum))[::-1]
    ritz_sorted = np.sort(np.abs(ritz.values))[::-1]
    for j, r in enumerate(ritz_sorted):
        assert r <= true_sorted[j] + 1e-8


def test_polynomial_identity_check():
    A, _ = random_symmetric(40, seed=6)
    g = unit_sphere_vector(40, SeededStream(6))
    assert polynomial_identity_check(A, g, 5, [1.0]) <= 1e-12
    assert polynomial_identity_check(A, g, 5, [0.0, 1.0]) <= 1e-8
    # Degree-5 Chebyshev polynomial in the power basis.
    coeffs = TBAR_SCALE * np.polynomial.chebyshev.cheb2poly([0, 0, 0, 0, 0, 1])
    assert polynomial_identity_check(A, g, 10, coeffs) <= 1e-6
    with pytest.raises(LanczosError):
        polynomial_identity_check(A, g, 3, [0.0, 0.0, 0.0, 1.0])


def test_slq_moment_identity_keystone():
    A, _ = random_symmetric(30, seed=22)
    g = unit_sphere_vector(30, SeededStream(22))
    m = 12
    ritz = tridiag_eig(lanczos(A, g, m))
    dense = A.to_dense()
    eigs, V = np.linalg.eigh(dense)
    c = (V.T @ g) ** 2
    for j in range(m):
        f_moment = float(ritz.weights @ cheb_normalized(j, ritz.values))
        true_moment = float(c @ cheb_normalized(j, eigs))
        assert abs(f_moment - true_moment) <= 1e-8
