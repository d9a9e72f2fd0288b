"""Kinematic geometry of the n-body problem: Jacobi vectors, invariants,
weighted root systems, shape space and central configurations."""
from .core import (
    CenteredConfiguration,
    Configuration,
    ConfigurationState,
    KinematicSummary,
    MassDistribution,
    center,
    is_centered,
    kinematic_inner,
    kinematic_quantities,
)
from .errors import (
    CollisionError,
    ConvergenceError,
    DimensionError,
    GeometryError,
    InvalidReducedMassError,
    NotCenteredError,
    WallError,
)

__version__ = "0.1.0"
