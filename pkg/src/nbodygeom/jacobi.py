"""Jacobi vectors and the basic Jacobi transformations.

The standard Jacobi transformation sends a centered configuration
``(a_0, ..., a_{n-1})`` to the ``d x (n-1)`` matrix of Jacobi vectors

    x_k = zeta_k * (a_k - b_{k-1}),    zeta_k^2 = m_k M_{k-1} / M_k

where ``M_k`` is the mass of bodies ``k+1..n`` (1-based labels, see
:attr:`MassDistribution.tail_sums`) and ``b_{k-1}`` is the center of mass of
bodies ``k..n``.  It is an O(d)-equivariant isometry from the kinematic metric
onto the unit-mass standard model.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    CenteredConfiguration,
    Configuration,
    ConfigurationState,
    MassDistribution,
    _frozen,
    as_masses,
    require_centered,
)
from .errors import DimensionError, GeometryError

DEFAULT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class JacobiCoefficients:
    """Coefficients of the standard Jacobi transformation for one mass set.

    ``forward_matrix`` is ``(n-1) x n``: row k gives ``x_k`` as a combination
    of the positions (its last column is zero).  ``inverse_matrix`` is
    ``n x (n-1)``: it rebuilds all n positions of the centered configuration
    from the Jacobi vectors, the last row enforcing ``sum m_i a_i = 0``.
    """

    masses: MassDistribution
    zetas: np.ndarray
    forward_matrix: np.ndarray
    inverse_matrix: np.ndarray

    @property
    def n(self) -> int:
        return self.masses.n

    @property
    def lower_inverse(self) -> np.ndarray:
        """The lower-triangular ``(n-1) x (n-1)`` block of ``inverse_matrix``."""
        return self.inverse_matrix[:-1]


def standard_coefficients(masses) -> JacobiCoefficients:
    masses = as_masses(masses)
    n = masses.n
    if n < 2:
        raise DimensionError("Jacobi vectors need at least two bodies")
    m = masses.masses
    tail = masses.tail_sums  # tail[k] = m[k:].sum()
    # zeta_k for 0-based k = 0..n-2: m_k * (m_k + ... ) / (m_{k+1} + ...)
    zetas = np.sqrt(m[:-1] * tail[:-1] / tail[1:])

    fwd = np.zeros((n - 1, n))
    low = np.zeros((n - 1, n - 1))
    for i in range(n - 1):
        fwd[i, i] = zetas[i]
        fwd[i, :i] = zetas[i] * m[:i] / tail[i]
        low[i, i] = 1.0 / zetas[i]
        low[i, :i] = -m[:i] / (tail[1 : i + 1] * zetas[:i])
    last = -(m[:-1] @ low) / m[-1]
    inv = np.vstack([low, last])
    return JacobiCoefficients(masses, _frozen(zetas), _frozen(fwd), _frozen(inv))


@dataclass(frozen=True, eq=False)
class JacobiMatrix:
    """The ``d x (n-1)`` matrix whose columns are the Jacobi vectors."""

    matrix: np.ndarray
    coefficients: JacobiCoefficients | None = None

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen(np.atleast_2d(self.matrix)))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def columns(self) -> np.ndarray:
        """Jacobi vectors as rows, shape ``(n-1, d)``."""
        return self.matrix.T

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix))


def _matrix_of(x) -> np.ndarray:
    if isinstance(x, JacobiMatrix):
        return x.matrix
    return np.atleast_2d(np.asarray(x, dtype=float))


def forward(coeffs: JacobiCoefficients, config: Configuration) -> JacobiMatrix:
    """Jacobi matrix of a centered configuration."""
    if config.masses != coeffs.masses:
        raise DimensionError("configuration masses differ from the coefficients")
    config = require_centered(config)
    return JacobiMatrix((coeffs.forward_matrix @ config.positions).T, coeffs)


def inverse(coeffs: JacobiCoefficients, x) -> CenteredConfiguration:
    """Centered configuration whose Jacobi matrix is ``x``."""
    mat = _matrix_of(x)
    if mat.shape[1] != coeffs.n - 1:
        raise DimensionError(
            f"Jacobi matrix has {mat.shape[1]} columns, expected {coeffs.n - 1}"
        )
    low = coeffs.lower_inverse
    head = low @ mat.T
    # last body from the center-of-mass condition rather than the stored row,
    # so that sum m_i a_i cancels to rounding
    m = coeffs.masses.masses
    tail = -(m[:-1] @ head) / m[-1]
    return CenteredConfiguration._exact(np.vstack([head, tail]), coeffs.masses)


def jacobi_vectors(config: Configuration) -> JacobiMatrix:
    """Shortcut: standard Jacobi matrix of a centered configuration."""
    return forward(standard_coefficients(config.masses), config)


# -- basic Jacobi transformations -------------------------------------------
#
# Each acts on a Configuration, or on a ConfigurationState by transforming
# positions and velocities with the same linear map.


def _apply(obj, fn):
    if isinstance(obj, ConfigurationState):
        pos, masses = fn(obj.config.positions, obj.masses.masses)
        vel, _ = fn(obj.velocities, obj.masses.masses)
        return ConfigurationState(Configuration(pos, masses), vel)
    pos, masses = fn(obj.positions, obj.masses.masses)
    return Configuration(pos, masses)


def basic_rho(i: int, j: int, obj):
    """The (i, j) basic Jacobi transformation.

    Body i becomes the relative vector ``a_i - a_j`` carrying the reduced mass;
    body j becomes the center of mass of the pair carrying ``m_i + m_j``.
    """
    n = obj.masses.n
    if i == j:
        raise GeometryError("basic Jacobi transformation needs i != j")
    if not (0 <= i < n and 0 <= j < n):
        raise GeometryError(f"body index out of range for n = {n}")

    def fn(a, m):
        a = np.array(a)
        m = np.array(m)
        mi, mj = m[i], m[j]
        ai, aj = a[i].copy(), a[j].copy()
        a[i] = ai - aj
        a[j] = (mi * ai + mj * aj) / (mi + mj)
        m[i] = mi * mj / (mi + mj)
        m[j] = mi + mj
        return a, m

    return _apply(obj, fn)


def mass_normalize(obj):
    """Scale each position by ``sqrt(m_i)`` and set all masses to 1."""

    def fn(a, m):
        return np.sqrt(m)[:, None] * a, np.ones_like(m)

    return _apply(obj, fn)


def permute(sigma, obj):
    """Relabel bodies: new body k is old body ``sigma[k]``."""
    sigma = np.asarray(sigma)
    n = obj.masses.n
    if sigma.shape != (n,) or sorted(sigma.tolist()) != list(range(n)):
        raise GeometryError(f"{sigma.tolist()} is not a permutation of 0..{n - 1}")

    def fn(a, m):
        return np.asarray(a)[sigma], np.asarray(m)[sigma]

    return _apply(obj, fn)


def reduction_chain(obj):
    """The composite ``rho_0 . rho_{1n} . ... . rho_{n-1,n}`` on a free configuration.

    Bodies ``0..n-2`` end up as the standard Jacobi vectors of the centered
    configuration and the last body, before mass normalization, as the center
    of mass.  Returns the transformed object and the mass distribution just
    before normalization (whose last entry is the total mass).
    """
    n = obj.masses.n
    out = obj
    for k in range(n - 2, -1, -1):
        out = basic_rho(k, n - 1, out)
    return mass_normalize(out), out.masses


def is_jacobi_transformation(matrix, masses, tol: float = DEFAULT_TOL) -> bool:
    """Whether ``matrix`` (acting on Jacobi matrices from the right) is a
    Jacobi transformation of the standard model, i.e. lies in O(n-1)."""
    phi = np.asarray(matrix, dtype=float)
    if phi.ndim != 2 or phi.shape[0] != phi.shape[1]:
        raise DimensionError("a Jacobi transformation of the standard model is square")
    if masses is not None and phi.shape[0] != as_masses(masses).n - 1:
        raise DimensionError(
            f"matrix is {phi.shape[0]}x{phi.shape[0]}, the model has "
            f"{as_masses(masses).n - 1} Jacobi vectors"
        )
    return bool(np.max(np.abs(phi.T @ phi - np.eye(phi.shape[0]))) <= tol)


def act(phi, x) -> JacobiMatrix:
    """Right action ``X -> X phi`` of O(n-1) on a Jacobi matrix."""
    coeffs = x.coefficients if isinstance(x, JacobiMatrix) else None
    return JacobiMatrix(_matrix_of(x) @ np.asarray(phi, dtype=float), coeffs)
