"""Shared oracles and builders for the test suite.

Everything here is computed by a route independent of the library code it
checks: dense eigendecompositions, brute-force transportation LPs, and
exhaustive vertex enumeration for small moment-matching instances.
"""

import itertools

import numpy as np
import pytest
import scipy.optimize

from specden import DenseOperator, DiscreteDistribution, SeededStream
from specden.randgen import random_orthogonal


def random_symmetric(n, seed, spectrum=None):
    """Dense operator with a known spectrum (default: uniform in [-1, 1])."""
    rng = np.random.default_rng(seed)
    if spectrum is None:
        spectrum = rng.uniform(-1.0, 1.0, size=n)
    V = random_orthogonal(n, SeededStream(seed, stream_id=123))
    return DenseOperator((V * spectrum) @ V.T), np.asarray(spectrum, dtype=float)


def random_distribution(rng, max_atoms=6):
    k = rng.integers(1, max_atoms + 1)
    loc = rng.uniform(-2.0, 2.0, size=k)
    w = rng.uniform(0.1, 1.0, size=k)
    return DiscreteDistribution(loc, w / w.sum())


def transport_lp_w1(p, q):
    """Brute-force optimal-transport LP value between two discrete measures."""
    cost = np.abs(p.locations[:, None] - q.locations[None, :])
    np_, nq = len(p), len(q)
    c = cost.ravel()
    A_eq = []
    for i in range(np_):
        row = np.zeros((np_, nq))
        row[i, :] = 1.0
        A_eq.append(row.ravel())
    for j in range(nq):
        row = np.zeros((np_, nq))
        row[:, j] = 1.0
        A_eq.append(row.ravel())
    b_eq = np.concatenate([p.weights, q.weights])
    res = scipy.optimize.linprog(
        c, A_eq=np.array(A_eq), b_eq=b_eq, bounds=[(0, None)] * (np_ * nq),
        method="highs",
    )
    assert res.success, res.message
    return float(res.fun)


def vertex_enumeration_l1(T, z):
    """Exact min of ||T q - z||_1 over the probability simplex.

    Optimal points are vertices of the simplex sliced by the hyperplanes
    T_i q = z_i; enumerate every candidate basic solution directly.  Only
    viable for tiny instances (d <= 8, N <= 3).
    """
    N, m = T.shape
    best = np.inf
    ones = np.ones(m)
    for k in range(N + 1):
        for active in itertools.combinations(range(N), k):
            for free in itertools.combinations(range(m), k + 1):
                M = np.vstack([ones[list(free)], T[np.ix_(list(active), list(free))]])
                rhs = np.concatenate([[1.0], z[list(active)]])
                try:
                    x = np.linalg.solve(M, rhs)
                except np.linalg.LinAlgError:
                    continue
                if np.any(x < -1e-10):
                    continue
                q = np.zeros(m)
                q[list(free)] = np.clip(x, 0.0, None)
                q /= q.sum()
                best = min(best, float(np.abs(T @ q - z).sum()))
    return best


def dense_cheb_quadratic_form(matrix, g, N):
    """g^T Tbar_i(A) g for i = 0..N via eigendecomposition (oracle route)."""
    from specden.chebyshev import cheb_normalized

    eigs, V = np.linalg.eigh(matrix)
    c = V.T @ g
    return np.array([float(c**2 @ cheb_normalized(i, eigs)) for i in range(N + 1)])


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
