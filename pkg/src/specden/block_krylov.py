"""Block Krylov iteration with a converged-Ritz-pair deflation set.

Builds the odd-power Krylov block [A X, A^3 X, ..., A^(2q+1) X] from a
Gaussian start, extracts Ritz pairs by Rayleigh-Ritz, and admits into the
deflation set only pairs whose residual beats the threshold
||A||_est / n^beta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lanczos import magnitude_order
from .operators import OperatorError, spectral_norm_upper_bound
from .randgen import gaussian_matrix

# Columns whose norm drops below this fraction of their pre-projection norm
# during orthonormalization are treated as dependent and dropped.
DROP_TOL = 1e-10

DEFAULT_BETA = 3.0


@dataclass
class DeflationResult:
    """Converged Ritz pairs from block Krylov.

    Z has orthonormal columns Q v_j for the admitted indices; lambdas are the
    matching Ritz values sorted by descending magnitude.
    """

    Z: np.ndarray
    lambdas: np.ndarray
    residuals: np.ndarray
    candidates_examined: int
    norm_estimate: float

    @property
    def s(self):
        return self.lambdas.size


def default_depth(n):
    return math.ceil(2.0 * math.log2(max(n, 2)))


def orthonormalize_columns(K):
    """Rank-revealing orthonormal basis of the column span.

    Pivoted QR with small trailing diagonal entries of R treated as rank
    deficiency; dependent columns are dropped.
    """
    import scipy.linalg

    n = K.shape[0]
    if K.size == 0 or not np.any(K):
        return np.empty((n, 0))
    Q, R, _ = scipy.linalg.qr(K, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    r = int(np.count_nonzero(diag > DROP_TOL * diag[0]))
    return Q[:, :r]


def build_krylov_block(A, X, q, ledger=None):
    """[A X, A^3 X, ..., A^(2q+1) X]; consumes l * (2q + 1) applications."""
    blocks = [A.apply_block(X, ledger, stage="krylov_subspace")]
    for _ in range(q):
        half = A.apply_block(blocks[-1], ledger, stage="krylov_subspace")
        blocks.append(A.apply_block(half, ledger, stage="krylov_subspace"))
    return np.hstack(blocks)


def rayleigh_ritz(A, Q, ledger=None):
    """Eigendecomposition of Q^T A Q; charges r = #columns applications.

    Returns (values, vectors) sorted by descending magnitude.
    """
    Q = np.asarray(Q, dtype=float)
    r = Q.shape[1]
    if not np.allclose(Q.T @ Q, np.eye(r), atol=1e-8):
        raise OperatorError("Q must have orthonormal columns")
    AQ = A.apply_block(Q, ledger, stage="rayleigh_ritz")
    T = Q.T @ AQ
    values, vectors = np.linalg.eigh(0.5 * (T + T.T))
    order = magnitude_order(values)
    return values[order], vectors[:, order]


def block_krylov_deflation(A, l, q=None, beta=DEFAULT_BETA, stream=None, ledger=None):
    """Find converged large-magnitude eigenpairs for deflation.

    Charges l(2q+1) applications for the subspace, r for the combined
    Rayleigh-Ritz / residual pass, plus the norm-estimation cost.
    """
    from .randgen import SeededStream

    n = A.dimension
    if not 1 <= l <= n:
        raise OperatorError(f"block size {l} outside 1..{n}")
    if q is None:
        q = default_depth(n)
    if q < 0:
        raise OperatorError("depth must be nonnegative")
    if beta <= 0:
        raise OperatorError("beta must be positive")
    if stream is None:
        stream = SeededStream(0)

    X = gaussian_matrix(n, l, stream)
    K = build_krylov_block(A, X, q, ledger)
    Q = orthonormalize_columns(K)
    r = Q.shape[1]
    norm_est = spectral_norm_upper_bound(
        A, ledger, stream.substream(7919), stage="norm_estimate"
    )
    if r == 0:
        return DeflationResult(
            Z=np.empty((n, 0)),
            lambdas=np.empty(0),
            residuals=np.empty(0),
            candidates_examined=0,
            norm_estimate=norm_est,
        )

    # One pass of A Q serves both T = Q^T (A Q) and the residual tests.
    AQ = A.apply_block(Q, ledger, stage="rayleigh_ritz")
    T = Q.T @ AQ
    values, vectors = np.linalg.eigh(0.5 * (T + T.T))
    order = magnitude_order(values)
    values, vectors = values[order], vectors[:, order]

    ritz_vecs = Q @ vectors
    residual_block = AQ @ vectors - ritz_vecs * values
    residuals = np.linalg.norm(residual_block, axis=0)

    threshold = norm_est / n**beta
    admitted = np.flatnonzero(residuals <= threshold)
    return DeflationResult(
        Z=ritz_vecs[:, admitted],
        lambdas=values[admitted],
        residuals=residuals[admitted],
        candidates_examined=r,
        norm_estimate=norm_est,
    )
