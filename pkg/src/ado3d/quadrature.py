"""Gauss-Legendre discrete-ordinate sets on [-1, 1].

The 2N nodes are indexed so that the N positive cosines come first in
ascending order, followed by their negatives: mu[N + i] = -mu[i] and
w[N + i] = w[i] for 0 <= i < N.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

__all__ = ["QuadratureSet", "gauss_legendre"]

# Nodes of a Gauss-Legendre rule are well separated at any practical order,
# so pairing +/- nodes only needs a loose matching tolerance.
_PAIR_TOL = 1e-14


@dataclass(frozen=True)
class QuadratureSet:
    """A 2N-point Gauss-Legendre rule with the sign-paired index convention."""

    half_order: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = self.half_order
        mu = np.asarray(self.nodes, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if n < 1:
            raise ValueError("half_order must be >= 1")
        if mu.shape != (2 * n,) or w.shape != (2 * n,):
            raise ValueError("nodes and weights must have length 2N")
        if not (np.all(np.diff(mu[:n]) > 0) and 0 < mu[0] and mu[n - 1] < 1):
            raise ValueError("positive nodes must be ascending in (0, 1)")
        if np.max(np.abs(mu[n:] + mu[:n])) > _PAIR_TOL:
            raise ValueError("negative nodes must mirror the positive ones")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        object.__setattr__(self, "nodes", mu)
        object.__setattr__(self, "weights", w)

    @property
    def positive_nodes(self) -> np.ndarray:
        return self.nodes[: self.half_order]

    @property
    def positive_weights(self) -> np.ndarray:
        return self.weights[: self.half_order]


def gauss_legendre(half_order: int) -> QuadratureSet:
    """Build the 2N-point Gauss-Legendre rule via the Golub-Welsch algorithm.

    The symmetric tridiagonal Jacobi matrix of the Legendre recurrence is
    diagonalized; its eigenvalues are the nodes and the squared first
    components of the eigenvectors give the weights.
    """
    if half_order < 1:
        raise ValueError("half_order must be a positive integer")
    n = 2 * half_order
    k = np.arange(1, n, dtype=float)
    beta = k / np.sqrt(4.0 * k * k - 1.0)
    x, vecs = eigh_tridiagonal(np.zeros(n), beta)
    w = 2.0 * vecs[0] ** 2

    pos = x > 0.0
    order = np.argsort(x[pos])
    mu_pos = x[pos][order]
    w_pos = w[pos][order]
    nodes = np.concatenate([mu_pos, -mu_pos])
    weights = np.concatenate([w_pos, w_pos])
    return QuadratureSet(half_order=half_order, nodes=nodes, weights=weights)
