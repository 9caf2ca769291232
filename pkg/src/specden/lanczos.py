"""Lanczos tridiagonalization with full reorthogonalization.

The three-term recurrence builds an orthonormal basis Q of the Krylov space
of (A, g) together with the tridiagonal T = Q^T A Q.  Full
reorthogonalization (two Gram-Schmidt passes against all previous columns)
is on by default; without it the computed basis loses orthogonality long
before m = n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

# An off-diagonal below BREAKDOWN_RTOL * scale(T) signals an invariant
# subspace; iteration stops and the remaining applications are not charged.
BREAKDOWN_RTOL = 1e-12


class LanczosError(ValueError):
    pass


@dataclass
class TridiagonalFactorization:
    """Lanczos output: T (alpha diagonal, eta off-diagonal) and basis Q.

    ``m_effective`` counts iterations completed before breakdown; alpha has
    length m_effective and eta one less.
    """

    alpha: np.ndarray
    eta: np.ndarray
    Q: np.ndarray
    m_requested: int

    @property
    def m_effective(self):
        return self.alpha.size

    def tridiagonal(self):
        m = self.m_effective
        T = np.diag(self.alpha)
        if m > 1:
            T += np.diag(self.eta, 1) + np.diag(self.eta, -1)
        return T


@dataclass
class RitzDecomposition:
    """Eigendecomposition of T, sorted by descending eigenvalue magnitude.

    ``weights`` are the squared first components (v_j^T e_1)^2 and sum to 1;
    ``index_map`` gives each entry's position in ascending-eigenvalue order.
    """

    values: np.ndarray
    vectors: np.ndarray
    weights: np.ndarray
    index_map: np.ndarray


def magnitude_order(values):
    """Descending |value|; ties broken by larger signed value first."""
    values = np.asarray(values, dtype=float)
    return np.lexsort((-values, -np.abs(values)))


def lanczos(A, g, m, reorth=True, ledger=None):
    """Run m Lanczos iterations from unit vector g.

    Consumes exactly m applications of A (fewer on breakdown).  Raises for a
    non-unit start or m > dimension.
    """
    g = np.asarray(g, dtype=float)
    n = A.dimension
    if abs(np.linalg.norm(g) - 1.0) > 1e-10:
        raise LanczosError("starting vector must have unit norm")
    if not 1 <= m <= n:
        raise LanczosError(f"need 1 <= m <= n, got m={m}, n={n}")

    Q = np.empty((n, m))
    alpha = np.empty(m)
    eta = np.empty(max(m - 1, 0))
    Q[:, 0] = g
    w = A.apply(g, ledger, stage="lanczos")
    alpha[0] = g @ w
    tilde = w - alpha[0] * g
    scale = max(abs(alpha[0]), 1e-300)
    m_eff = 1
    for i in range(1, m):
        if reorth:
            basis = Q[:, :i]
            tilde -= basis @ (basis.T @ tilde)
            tilde -= basis @ (basis.T @ tilde)
        eta_i = np.linalg.norm(tilde)
        if eta_i < BREAKDOWN_RTOL * scale:
            break
        q = tilde / eta_i
        Q[:, i] = q
        eta[i - 1] = eta_i
        w = A.apply(q, ledger, stage="lanczos")
        alpha[i] = q @ w
        tilde = w - alpha[i] * q - eta_i * Q[:, i - 1]
        scale = max(scale, abs(alpha[i]), eta_i)
        m_eff = i + 1
    return TridiagonalFactorization(
        alpha=alpha[:m_eff].copy(),
        eta=eta[: max(m_eff - 1, 0)].copy(),
        Q=Q[:, :m_eff].copy(),
        m_requested=m,
    )


def tridiag_eig(fact):
    """Exact eigendecomposition of the tridiagonal T with first-row weights."""
    m = fact.m_effective
    if m == 1:
        values = fact.alpha.copy()
        vectors = np.ones((1, 1))
    else:
        values, vectors = scipy.linalg.eigh_tridiagonal(fact.alpha, fact.eta)
    order = magnitude_order(values)
    values = values[order]
    vectors = vectors[:, order]
    first_row = vectors[0, :]
    return RitzDecomposition(
        values=values,
        vectors=vectors,
        weights=first_row**2,
        index_map=order,
    )


def polynomial_identity_check(A, g, m, coeffs, ledger=None):
    """Residual ||p(A) g - Q p(T) Q^T g|| for a polynomial of degree < m.

    Test utility for the Krylov polynomial identity; coefficients are in the
    power basis, lowest degree first.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    degree = coeffs.size - 1
    if degree >= m:
        raise LanczosError(f"polynomial degree {degree} must be < m = {m}")
    fact = lanczos(A, np.asarray(g, dtype=float), m, reorth=True, ledger=ledger)

    # Horner on the operator side: r = c_d g; r = A r + c_k g going down.
    g = np.asarray(g, dtype=float)
    r = coeffs[-1] * g
    for c in coeffs[-2::-1]:
        r = A.apply(r, ledger, stage="identity_check") + c * g
    T = fact.tridiagonal()
    x = fact.Q.T @ g
    y = coeffs[-1] * x
    for c in coeffs[-2::-1]:
        y = T @ y + c * x
    return float(np.linalg.norm(r - fact.Q @ y))
