"""Deterministic seeded random sources.

Streams are keyed by (seed, stream_id) on a counter-based Philox generator,
so parallel trials reproduce bit-for-bit regardless of scheduling.  Gaussian
draws use numpy's ziggurat ``standard_normal``; this choice is fixed for
reproducibility.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SeededStream:
    """Value-like handle for an independent random stream."""

    seed: int
    stream_id: int = 0

    def generator(self):
        key = (self.seed & _MASK64) | ((self.stream_id & _MASK64) << 64)
        return np.random.Generator(np.random.Philox(key=key))

    def substream(self, k):
        """Derive a distinct child stream; deterministic in (self, k)."""
        return SeededStream(self.seed, (self.stream_id * 1000003 + k + 1) & _MASK64)


def gaussian_matrix(rows, cols, stream):
    """rows x cols matrix of i.i.d. N(0, 1) entries."""
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be >= 1")
    return stream.generator().standard_normal((rows, cols))


def gaussian_vector(n, stream):
    if n < 1:
        raise ValueError("n must be >= 1")
    return stream.generator().standard_normal(n)


def unit_sphere_vector(n, stream):
    """Uniform draw from the unit sphere: a normalized Gaussian vector."""
    g = gaussian_vector(n, stream)
    norm = np.linalg.norm(g)
    while norm == 0.0:  # probability zero, but keep the contract total
        g = stream.substream(0).generator().standard_normal(n)
        norm = np.linalg.norm(g)
    return g / norm


def random_orthogonal(n, stream):
    """Haar-ish random orthogonal matrix: QR of a Gaussian with sign fix."""
    G = gaussian_matrix(n, n, stream)
    Q, R = np.linalg.qr(G)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs
