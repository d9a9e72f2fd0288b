"""Polynomial invariants of configurations under rotations and relabelings
of the Jacobi vectors.

For a d x m matrix X the k-th invariant is

    I_k = sum over k-subsets S of columns of |x_S1 ^ ... ^ x_Sk|^2,

a sum of k x k Gram determinants.  By Cauchy-Binet it is also the k-th
elementary symmetric function of the eigenvalues of X X^T, which makes it
invariant under X -> g X phi for orthogonal g and phi.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import factorial

import numpy as np

from .core import CenteredConfiguration, Configuration, _frozen, require_centered
from .errors import DimensionError
from .jacobi import JacobiMatrix, jacobi_vectors


@dataclass(frozen=True, eq=False)
class InvariantVector:
    """Values ``I_1..I_q`` with ``q = min(d, m)``."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))

    @property
    def q(self) -> int:
        return self.values.size

    def I(self, k: int) -> float:  # noqa: E743
        """``I_k``; zero for ``k > q`` since the configuration has rank at most q."""
        if k < 1:
            raise ValueError("invariants are indexed from 1")
        return float(self.values[k - 1]) if k <= self.q else 0.0

    def __iter__(self):
        return iter(self.values.tolist())

    def __len__(self):
        return self.q


def wedge_norm_sq(vectors) -> float:
    """``|v_1 ^ ... ^ v_k|^2`` for the rows of ``vectors``.

    Equal to the Gram determinant ``det(v v^T)``; evaluated as the squared
    product of the R-diagonal of a QR factorization, which keeps its relative
    accuracy on nearly dependent vectors where the Gram determinant does not.
    """
    v = np.atleast_2d(np.asarray(vectors, dtype=float))
    k, d = v.shape
    if k > d:
        return 0.0
    r = np.linalg.qr(v.T, mode="r")
    return float(np.prod(np.diag(r) ** 2))


def gram_subset_sums(vectors, weights=None) -> np.ndarray:
    """``sum_S (prod_{s in S} w_s) |v_S|^2`` over subsets S of rows, for
    ``|S| = 1..min(rows, cols)``, in lexicographic subset order."""
    v = np.atleast_2d(np.asarray(vectors, dtype=float))
    rows, cols = v.shape
    w = np.ones(rows) if weights is None else np.asarray(weights, dtype=float)
    out = np.zeros(min(rows, cols))
    if out.size:
        out[0] = float(w @ np.sum(v * v, axis=1))
    for k in range(2, out.size + 1):
        total = 0.0
        for s in combinations(range(rows), k):
            idx = list(s)
            total += np.prod(w[idx]) * wedge_norm_sq(v[idx])
        out[k - 1] = total
    return out


def jacobi_invariants(x) -> InvariantVector:
    """Invariants of a Jacobi matrix (unit masses), from column Gram minors."""
    mat = x.matrix if isinstance(x, JacobiMatrix) else np.atleast_2d(np.asarray(x, dtype=float))
    return InvariantVector(gram_subset_sums(mat.T))


def mass_weighted_invariants(config: Configuration) -> InvariantVector:
    """``I_k = sum_{i_1<..<i_k} m_i1 .. m_ik |a_i1 ^ .. ^ a_ik|^2`` on a centered
    configuration, truncated to the same ``q = min(d, n-1)`` as the Jacobi form."""
    config = require_centered(config)
    vals = gram_subset_sums(config.positions, config.m)
    q = min(config.dim, config.n - 1)
    return InvariantVector(vals[:q])


def _tail_weight(config: CenteredConfiguration) -> float:
    return float(np.prod(config.m) / config.masses.total)


def triangle_area(config: Configuration) -> float:
    """Area of a three-body triangle via ``|x_1 ^ x_2| = 2 sqrt(m_0 m_1 m_2 / M) A``."""
    config = require_centered(config)
    if config.n != 3:
        raise DimensionError("triangle_area needs three bodies")
    x = jacobi_vectors(config).columns
    wedge = np.sqrt(max(wedge_norm_sq(x), 0.0))
    return float(wedge / (2.0 * np.sqrt(_tail_weight(config))))


def tetra_volume(config: Configuration) -> float:
    """Volume of a four-body tetrahedron via
    ``|det(x_1, x_2, x_3)| = 3! sqrt(m_0 m_1 m_2 m_3 / M) V``."""
    config = require_centered(config)
    if config.n != 4 or config.dim != 3:
        raise DimensionError("tetra_volume needs four bodies in 3-space")
    x = jacobi_vectors(config).matrix
    return float(abs(np.linalg.det(x)) / (factorial(3) * np.sqrt(_tail_weight(config))))
