"""Mass distributions, configurations and the kinematic quantities.

Bodies are indexed from 0.  Positions are stored as an ``(n, d)`` array whose
rows are the position vectors of the bodies.  All arrays held by the types
below are copied on construction and marked read-only.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionError, GeometryError, NotCenteredError

# relative tolerance of the centered-ness test, |sum m_i a_i| <= rtol * sum m_i |a_i|
CENTERED_RTOL = 1e-12


def _frozen(a, dtype=float):
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


class MassDistribution:
    """Ordered positive masses ``m_0..m_{n-1}`` and derived quantities."""

    def __init__(self, masses):
        m = _frozen(masses)
        if m.ndim != 1 or m.size == 0:
            raise GeometryError("masses must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(m)):
            raise GeometryError("masses must be finite")
        if np.any(m <= 0):
            raise GeometryError("mass must be positive")
        self.masses = m

    def __repr__(self):
        return f"MassDistribution({self.masses.tolist()})"

    def __len__(self):
        return self.masses.size

    def __eq__(self, other):
        if not isinstance(other, MassDistribution):
            return NotImplemented
        return self.masses.shape == other.masses.shape and bool(
            np.all(self.masses == other.masses)
        )

    def __hash__(self):
        return hash(self.masses.tobytes())

    @property
    def n(self) -> int:
        return self.masses.size

    @cached_property
    def total(self) -> float:
        return float(self.masses.sum())

    @cached_property
    def tail_sums(self) -> np.ndarray:
        """``tail_sums[k] = m_{k+1} + ... + m_n`` in 1-based body labels.

        In 0-based indexing this is ``masses[k:].sum()``, so ``tail_sums[0]``
        is the total mass.
        """
        # reversed cumulative sum keeps the tail sums exact for the last bodies
        return _frozen(np.cumsum(self.masses[::-1])[::-1])

    @cached_property
    def reduced(self) -> np.ndarray:
        """Symmetric table ``mu_ij = m_i m_j / (m_i + m_j)``.

        The diagonal holds ``m_i / 2`` (the same formula at ``i == j``); it has
        no meaning for the n-body problem.
        """
        m = self.masses
        return _frozen(np.outer(m, m) / np.add.outer(m, m))

    def reduced_mass(self, i: int, j: int) -> float:
        if i == j:
            raise GeometryError("reduced mass needs two distinct bodies")
        return float(self.reduced[i, j])


def as_masses(masses) -> MassDistribution:
    if isinstance(masses, MassDistribution):
        return masses
    return MassDistribution(masses)


class Configuration:
    """Positions of n bodies in d-space together with their masses."""

    def __init__(self, positions, masses):
        masses = as_masses(masses)
        pos = _frozen(positions)
        if pos.ndim != 2:
            raise DimensionError("positions must be an (n, d) array")
        if pos.shape[0] != masses.n:
            raise DimensionError(
                f"{pos.shape[0]} positions given for {masses.n} masses"
            )
        if pos.shape[1] < 1:
            raise DimensionError("dimension must be positive")
        if not np.all(np.isfinite(pos)):
            raise GeometryError("positions must be finite")
        self.positions = pos
        self.masses = masses

    def __repr__(self):
        return (
            f"{type(self).__name__}(positions={self.positions.tolist()}, "
            f"masses={self.masses.masses.tolist()})"
        )

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    @property
    def m(self) -> np.ndarray:
        return self.masses.masses

    def center_of_mass(self) -> np.ndarray:
        return self.m @ self.positions / self.masses.total

    def moment_of_inertia(self) -> float:
        return float(np.sum(self.m * np.sum(self.positions**2, axis=1)))


def is_centered(config: Configuration, rtol: float | None = None) -> bool:
    rtol = CENTERED_RTOL if rtol is None else rtol
    m = config.m
    first = np.linalg.norm(m @ config.positions)
    scale = np.sum(m * np.linalg.norm(config.positions, axis=1))
    return bool(first <= rtol * scale)


class CenteredConfiguration(Configuration):
    """A configuration with ``sum m_i a_i = 0`` (to relative ``rtol``)."""

    def __init__(self, positions, masses, rtol: float | None = None):
        super().__init__(positions, masses)
        if not is_centered(self, rtol):
            raise NotCenteredError("configuration is not centered")

    @classmethod
    def _exact(cls, positions, masses):
        # centered by construction; skip the tolerance test
        obj = Configuration.__new__(cls)
        Configuration.__init__(obj, positions, masses)
        return obj


def require_centered(config: Configuration) -> CenteredConfiguration:
    """Return ``config`` as a CenteredConfiguration or raise NotCenteredError."""
    if isinstance(config, CenteredConfiguration):
        return config
    return CenteredConfiguration(config.positions, config.masses)


@dataclass(frozen=True, eq=False)
class ConfigurationState:
    """A configuration together with the velocities of its bodies."""

    config: Configuration
    velocities: np.ndarray

    def __post_init__(self):
        vel = _frozen(self.velocities)
        if vel.shape != self.config.positions.shape:
            raise DimensionError(
                f"velocities have shape {vel.shape}, positions have shape "
                f"{self.config.positions.shape}"
            )
        if not np.all(np.isfinite(vel)):
            raise GeometryError("velocities must be finite")
        object.__setattr__(self, "velocities", vel)

    @classmethod
    def from_arrays(cls, positions, velocities, masses):
        return cls(Configuration(positions, masses), velocities)

    @property
    def masses(self) -> MassDistribution:
        return self.config.masses


def hat(omega) -> np.ndarray:
    """Skew matrix ``S`` with ``S @ v == cross(omega, v)``."""
    x, y, z = omega
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def vee(skew) -> np.ndarray:
    """Inverse of :func:`hat`."""
    return np.array([skew[2, 1], skew[0, 2], skew[1, 0]])


@dataclass(frozen=True, eq=False)
class KinematicSummary:
    """Moment of inertia, kinetic energy, angular and linear momentum.

    ``angular_momentum`` is the d x d skew matrix
    ``sum m_i (a_i v_i^T - v_i a_i^T)``.  For d = 3 its transpose is
    ``hat(omega)`` where ``omega = sum m_i a_i x v_i``.
    """

    moment_I: float
    kinetic_T: float
    angular_momentum: np.ndarray
    linear_momentum: np.ndarray

    @property
    def omega(self) -> np.ndarray:
        if self.angular_momentum.shape != (3, 3):
            raise DimensionError("the angular momentum vector exists only for d = 3")
        return vee(self.angular_momentum.T)


def kinematic_quantities(state: ConfigurationState) -> KinematicSummary:
    m = state.masses.masses
    a = state.config.positions
    v = state.velocities
    ma = m[:, None] * a
    mv = m[:, None] * v
    moment = float(np.sum(ma * a))
    kinetic = 0.5 * float(np.sum(mv * v))
    cross = ma.T @ v
    angular = cross - cross.T
    return KinematicSummary(
        moment_I=moment,
        kinetic_T=kinetic,
        angular_momentum=_frozen(angular),
        linear_momentum=_frozen(mv.sum(axis=0)),
    )


def kinematic_inner(x: Configuration, y: Configuration) -> float:
    """Mass-weighted inner product ``sum m_i a_i . b_i``."""
    if x.positions.shape != y.positions.shape:
        raise DimensionError("configurations have different shapes")
    if x.masses != y.masses:
        raise DimensionError("configurations have different masses")
    return float(np.sum(x.m * np.sum(x.positions * y.positions, axis=1)))


def center(config: Configuration) -> tuple[CenteredConfiguration, np.ndarray]:
    """Translate ``config`` so its center of mass sits at the origin.

    Returns the centered configuration and the removed center of mass.
    """
    if isinstance(config, CenteredConfiguration):
        return config, np.zeros(config.dim)
    com = config.center_of_mass()
    if is_centered(config):
        return CenteredConfiguration(config.positions, config.masses), np.zeros(config.dim)
    return CenteredConfiguration._exact(config.positions - com, config.masses), com
