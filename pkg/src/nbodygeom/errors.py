"""Exception hierarchy shared by all modules."""


class GeometryError(ValueError):
    """Base class for invalid input to the geometric routines."""


class NotCenteredError(GeometryError):
    """Configuration does not have its center of mass at the origin."""


class DimensionError(GeometryError):
    """Array shapes or body counts do not agree."""


class CollisionError(GeometryError):
    """Two bodies coincide where the Newtonian potential is singular."""


class WallError(GeometryError):
    """A point of the collinear sphere lies on a collision wall."""


class InvalidReducedMassError(GeometryError):
    """A table of reduced masses violates the reduced-mass conditions."""


class ConvergenceError(RuntimeError):
    """An iterative solver did not reach its tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
