"""Matrix-free symmetric linear operators with exact matvec accounting.

Every algorithm in this package touches its input matrix only through
``SymmetricOperator.apply``, and every application is charged to a
``BudgetLedger``.  Projections and other vector arithmetic are free; only
products with the underlying matrix count.
"""

from __future__ import annotations

import math
import threading

import numpy as np
import scipy.sparse as sp


class OperatorError(ValueError):
    """Raised on dimension mismatches or invalid operator construction."""


class BudgetLedger:
    """Exact count of operator applications, broken down by stage label.

    Safe for concurrent increments; the final total is exact.
    """

    def __init__(self):
        self._counts = {}
        self._lock = threading.Lock()

    def charge(self, stage, amount=1):
        if amount < 0:
            raise ValueError("cannot charge a negative amount")
        with self._lock:
            self._counts[stage] = self._counts.get(stage, 0) + amount

    @property
    def counts(self):
        with self._lock:
            return dict(self._counts)

    @property
    def total(self):
        with self._lock:
            return sum(self._counts.values())

    def merge(self, other):
        """Fold another ledger's counts into this one."""
        for stage, count in other.counts.items():
            self.charge(stage, count)

    def report(self):
        lines = [f"{stage}: {count}" for stage, count in sorted(self.counts.items())]
        lines.append(f"total: {self.total}")
        return "\n".join(lines)

    def __repr__(self):
        return f"BudgetLedger({self.counts!r})"


class SymmetricOperator:
    """Abstract n x n symmetric linear map.

    Subclasses implement ``_matvec``.  ``apply`` never mutates its input and
    charges exactly one ledger unit per call.
    """

    def __init__(self, n):
        if n < 1:
            raise OperatorError(f"dimension must be positive, got {n}")
        self._n = int(n)

    @property
    def dimension(self):
        return self._n

    def _matvec(self, v):
        raise NotImplementedError

    def apply(self, v, ledger=None, stage="apply"):
        v = np.asarray(v, dtype=float)
        if v.shape != (self._n,):
            raise OperatorError(
                f"vector has shape {v.shape}, operator dimension is {self._n}"
            )
        out = self._matvec(v)
        if ledger is not None:
            ledger.charge(stage)
        return out

    def apply_block(self, V, ledger=None, stage="apply"):
        """Apply to each column of an n x k block; charges k ledger units."""
        V = np.asarray(V, dtype=float)
        if V.ndim != 2 or V.shape[0] != self._n:
            raise OperatorError(
                f"block has shape {V.shape}, operator dimension is {self._n}"
            )
        out = np.column_stack([self._matvec(V[:, j]) for j in range(V.shape[1])])
        if ledger is not None:
            ledger.charge(stage, V.shape[1])
        return out

    def to_dense(self):
        """Materialize the full matrix (test/oracle use only)."""
        return self.apply_block(np.eye(self._n))


class DenseOperator(SymmetricOperator):
    """Full symmetric matrix stored densely."""

    def __init__(self, matrix):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise OperatorError(f"expected a square matrix, got shape {matrix.shape}")
        scale = np.abs(matrix).max() if matrix.size else 0.0
        if not np.allclose(matrix, matrix.T, atol=1e-10 * max(scale, 1.0)):
            raise OperatorError("matrix is not symmetric")
        super().__init__(matrix.shape[0])
        self.matrix = 0.5 * (matrix + matrix.T)

    def _matvec(self, v):
        return self.matrix @ v

    def to_dense(self):
        return self.matrix.copy()


class DiagonalOperator(SymmetricOperator):
    def __init__(self, diagonal):
        diagonal = np.asarray(diagonal, dtype=float)
        if diagonal.ndim != 1:
            raise OperatorError("diagonal must be a vector")
        super().__init__(diagonal.shape[0])
        self.diagonal = diagonal.copy()

    def _matvec(self, v):
        return self.diagonal * v

    def to_dense(self):
        return np.diag(self.diagonal)


class SparseOperator(SymmetricOperator):
    def __init__(self, matrix):
        matrix = sp.csr_matrix(matrix)
        if matrix.shape[0] != matrix.shape[1]:
            raise OperatorError(f"expected a square matrix, got shape {matrix.shape}")
        diff = abs(matrix - matrix.T)
        scale = abs(matrix).max() if matrix.nnz else 0.0
        if diff.nnz and diff.max() > 1e-10 * max(scale, 1.0):
            raise OperatorError("sparse matrix is not symmetric")
        super().__init__(matrix.shape[0])
        self.matrix = matrix

    def _matvec(self, v):
        return self.matrix @ v

    def to_dense(self):
        return self.matrix.toarray()


class ScaledOperator(SymmetricOperator):
    """alpha * base; one apply charges a single base application."""

    def __init__(self, base, alpha):
        super().__init__(base.dimension)
        self.base = base
        self.alpha = float(alpha)

    def _matvec(self, v):
        return self.alpha * self.base._matvec(v)


class DeflatedOperator(SymmetricOperator):
    """(I - ZZ^T) A (I - ZZ^T) for orthonormal Z.

    The two projections are free; one apply charges a single application of
    the base operator.
    """

    def __init__(self, base, Z):
        Z = np.asarray(Z, dtype=float)
        if Z.ndim != 2 or Z.shape[0] != base.dimension:
            raise OperatorError(
                f"Z has shape {Z.shape}, operator dimension is {base.dimension}"
            )
        gram = Z.T @ Z
        if not np.allclose(gram, np.eye(Z.shape[1]), atol=1e-10):
            raise OperatorError("columns of Z are not orthonormal")
        super().__init__(base.dimension)
        self.base = base
        self.Z = Z.copy()

    def _project(self, v):
        return v - self.Z @ (self.Z.T @ v)

    def _matvec(self, v):
        return self._project(self.base._matvec(self._project(v)))


def dense_from_eigendecomposition(eigs, V):
    """Assemble V diag(eigs) V^T as a dense operator."""
    eigs = np.asarray(eigs, dtype=float)
    V = np.asarray(V, dtype=float)
    n = eigs.shape[0]
    if V.shape != (n, n):
        raise OperatorError(f"V has shape {V.shape}, expected ({n}, {n})")
    if not np.allclose(V.T @ V, np.eye(n), atol=1e-10):
        raise OperatorError("V is not orthonormal")
    return DenseOperator((V * eigs) @ V.T)


def deflate(base, Z):
    """Project out the column span of Z from the operator."""
    return DeflatedOperator(base, Z)


def norm_estimate_cost(n):
    """Matvecs consumed by spectral_norm_upper_bound on an n-dim operator."""
    return 2 * max(1, math.ceil(math.log2(n + 2)))


def spectral_norm_upper_bound(A, ledger=None, stream=None, stage="norm_estimate"):
    """Factor-2 upper bound on the spectral norm: ||A||_2 <= L <= 2 ||A||_2.

    Power iteration on A^2 from a random Gaussian start (A^2 rather than A so
    that sign-symmetric spectra do not defeat the Rayleigh readout), with
    ||A v|| as the readout, then doubled.  Deterministic given the stream.
    Returns 0.0 for the zero operator.
    """
    from .randgen import SeededStream

    if stream is None:
        stream = SeededStream(0, stream_id=991)
    n = A.dimension
    rng = stream.generator()
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    steps = max(1, math.ceil(math.log2(n + 2)))
    readout = 0.0
    for _ in range(steps):
        w = A.apply(v, ledger, stage)
        readout = np.linalg.norm(w)
        if readout == 0.0:
            return 0.0
        u = A.apply(w, ledger, stage)
        nu = np.linalg.norm(u)
        if nu == 0.0:
            return 2.0 * readout
        v = u / nu
    return 2.0 * readout
