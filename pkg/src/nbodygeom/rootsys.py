"""Weighted root systems of type A_{n-1}.

For the standard Jacobi transformation the separation of two bodies is a
linear functional of the Jacobi matrix,

    a_i - a_j = X @ w_ij,          sqrt(mu_ij) * |w_ij| = 1,

and the ``binom(n, 2)`` vectors ``w_ij`` (with ``w_ji = -w_ij``) form the
weighted root system of the mass distribution.  The unit vectors
``u_ij = sqrt(mu_ij) w_ij`` are the normalized roots.  Equal masses give the
ordinary A_{n-1} root system.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

import numpy as np

from .core import MassDistribution, _frozen, as_masses
from .errors import DimensionError, GeometryError, InvalidReducedMassError

REDUCED_MASS_TOL = 1e-10
ORTHOGONAL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class WeightedRootSystem:
    """Root vectors ``w_ij`` for ``i < j``, stored row-wise in ``roots``.

    Row ``p`` of ``roots`` belongs to the pair ``pairs[p]``; pairs are listed
    in lexicographic order.
    """

    masses: MassDistribution
    roots: np.ndarray

    def __post_init__(self):
        n = self.masses.n
        r = _frozen(self.roots)
        if r.shape != (n * (n - 1) // 2, n - 1):
            raise DimensionError(f"root table has shape {r.shape} for n = {n}")
        object.__setattr__(self, "roots", r)

    @property
    def n(self) -> int:
        return self.masses.n

    @cached_property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple(combinations(range(self.n), 2))

    @cached_property
    def _index(self) -> dict[tuple[int, int], int]:
        return {p: k for k, p in enumerate(self.pairs)}

    @cached_property
    def pair_weights(self) -> np.ndarray:
        """``m_i m_j`` for each pair, aligned with ``roots``."""
        m = self.masses.masses
        return _frozen([m[i] * m[j] for i, j in self.pairs])

    @cached_property
    def normalized(self) -> np.ndarray:
        """Unit roots ``u_ij`` aligned with ``roots``."""
        mu = self.masses.reduced
        scale = np.array([np.sqrt(mu[i, j]) for i, j in self.pairs])
        return _frozen(self.roots * scale[:, None])

    def w(self, i: int, j: int) -> np.ndarray:
        if i == j:
            raise GeometryError("roots are indexed by two distinct bodies")
        if i < j:
            return self.roots[self._index[(i, j)]]
        return -self.roots[self._index[(j, i)]]

    def u(self, i: int, j: int) -> np.ndarray:
        return np.sqrt(self.masses.reduced_mass(i, j)) * self.w(i, j)

    def simple_roots(self) -> np.ndarray:
        return np.array([self.w(i, i + 1) for i in range(self.n - 1)])

    def gram(self) -> np.ndarray:
        return self.roots @ self.roots.T

    def separations(self, x) -> np.ndarray:
        """``a_i - a_j`` for every pair from a ``d x (n-1)`` Jacobi matrix."""
        x = np.atleast_2d(np.asarray(getattr(x, "matrix", x), dtype=float))
        return x @ self.roots.T


def standard_roots(masses) -> WeightedRootSystem:
    """Roots of the standard Jacobi transformation, from their closed forms."""
    masses = as_masses(masses)
    n = masses.n
    if n < 2:
        raise DimensionError("a root system needs at least two bodies")
    m = masses.masses
    tail = masses.tail_sums  # tail[k] = m[k:].sum()
    roots = np.zeros((n * (n - 1) // 2, n - 1))
    for p, (i, j) in enumerate(combinations(range(n), 2)):
        w = roots[p]
        # leading entry at component i
        w[i] = np.sqrt(tail[i] / (m[i] * tail[i + 1]))
        for k in range(i + 1, min(j, n - 1)):
            w[k] = np.sqrt(m[k] / (tail[k] * tail[k + 1]))
        if j < n - 1:
            w[j] = -np.sqrt(tail[j + 1] / (m[j] * tail[j]))
    return WeightedRootSystem(masses, roots)


def root_angle(system: WeightedRootSystem, i: int, j: int, k: int) -> float:
    """Angle between ``u_ik`` and ``u_kj`` in radians, from the masses alone."""
    if len({i, j, k}) != 3:
        raise GeometryError("root angle needs three distinct bodies")
    m = system.masses.masses
    for idx in (i, j, k):
        if not 0 <= idx < system.n:
            raise GeometryError(f"body index {idx} out of range")
    c = -np.sqrt(m[i] * m[j] / ((m[i] + m[k]) * (m[k] + m[j])))
    return float(np.arccos(c))


def transform_roots(system: WeightedRootSystem, phi) -> WeightedRootSystem:
    """Root system of the Jacobi transformation ``X -> X phi``."""
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (system.n - 1, system.n - 1):
        raise DimensionError(f"phi must be {system.n - 1}x{system.n - 1}")
    if np.max(np.abs(phi.T @ phi - np.eye(system.n - 1))) > ORTHOGONAL_TOL:
        raise GeometryError("phi is not orthogonal")
    return WeightedRootSystem(system.masses, system.roots @ phi)


def check_reduced_masses(mu, tol: float = REDUCED_MASS_TOL) -> list[str]:
    """Violations of the two reduced-mass conditions, as readable messages."""
    mu = np.asarray(mu, dtype=float)
    n = mu.shape[0]
    problems = []
    if mu.shape != (n, n):
        return ["reduced-mass table must be square"]
    off = ~np.eye(n, dtype=bool)
    if np.any(mu[off] <= 0) or not np.all(np.isfinite(mu[off])):
        return ["reduced masses must be positive and finite"]
    if np.max(np.abs(mu - mu.T)) > tol * np.max(np.abs(mu[off])):
        problems.append("reduced-mass table is not symmetric")
    inv = np.where(off, 1.0 / np.where(off, mu, 1.0), 0.0)
    for i, j, k in combinations(range(n), 3):
        for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
            # 1/mu_ab + 1/mu_bc > 1/mu_ac
            if not inv[a, b] + inv[b, c] > inv[a, c]:
                problems.append(f"condition (i) fails for bodies {a}, {b}, {c}")
    for i, j, k, l in combinations(range(n), 4):
        s1 = inv[i, j] + inv[k, l]
        s2 = inv[i, k] + inv[j, l]
        s3 = inv[i, l] + inv[j, k]
        if max(abs(s1 - s2), abs(s1 - s3)) > tol:
            problems.append(f"condition (ii) fails for bodies {i}, {j}, {k}, {l}")
    return problems


def masses_from_reduced(mu, n: int | None = None) -> MassDistribution:
    """Recover the masses from the table ``mu[i, j]`` of reduced masses.

    Uses ``m_i = 2 / (1/mu_ij + 1/mu_ik - 1/mu_jk)`` and checks that every
    choice of ``j, k`` gives the same value.
    """
    mu = np.asarray(mu, dtype=float)
    if n is None:
        n = mu.shape[0]
    if mu.shape != (n, n):
        raise DimensionError(f"reduced-mass table must be {n}x{n}")
    if n < 3:
        raise InvalidReducedMassError("masses are determined by reduced masses only for n >= 3")
    problems = check_reduced_masses(mu)
    if problems:
        raise InvalidReducedMassError("; ".join(problems))
    inv = 1.0 / np.where(np.eye(n, dtype=bool), 1.0, mu)
    masses = np.empty(n)
    for i in range(n):
        others = [x for x in range(n) if x != i]
        vals = np.array(
            [2.0 / (inv[i, j] + inv[i, k] - inv[j, k]) for j, k in combinations(others, 2)]
        )
        masses[i] = vals[0]
        if np.max(np.abs(vals - vals[0])) > REDUCED_MASS_TOL * vals[0]:
            raise InvalidReducedMassError(f"inconsistent mass values for body {i}")
    return MassDistribution(masses)


def shape_circle_angles(masses) -> tuple[np.ndarray, np.ndarray]:
    """Central angles ``beta_k`` of the collision points on the 3-body shape
    circle, and the root angles ``alpha_k = pi - beta_k / 2``.

    ``beta_k`` is the angle opposite the collision point of the other two
    bodies.  With masses normalized to total 1,
    ``sin(beta_k) = 2 sqrt(m_0 m_1 m_2) / ((m_k + m_i)(m_k + m_j))``.
    """
    masses = as_masses(masses)
    if masses.n != 3:
        raise DimensionError("the shape circle is defined for three bodies")
    m = masses.masses / masses.total
    betas = np.empty(3)
    for k in range(3):
        i, j = [x for x in range(3) if x != k]
        denom = (m[k] + m[i]) * (m[k] + m[j])
        sin_b = 2.0 * np.sqrt(m.prod()) / denom
        # sin^2(beta/2) = m_k / denom when the masses sum to 1
        cos_b = 1.0 - 2.0 * m[k] / denom
        betas[k] = np.arctan2(sin_b, cos_b)
    return betas, np.pi - betas / 2.0


def masses_from_circle_angles(betas) -> np.ndarray:
    """Normalized masses ``m_k = 1 - 2 sin(beta_k) / sum(sin(beta_i))``."""
    s = np.sin(np.asarray(betas, dtype=float))
    return 1.0 - 2.0 * s / s.sum()
