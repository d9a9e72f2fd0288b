"""Shape space of d x m matrices modulo O(d) x O(m).

Every X is brought by orthogonal matrices on both sides to a diagonal
canonical form ``diag(r_1, .., r_d)`` with ``r_1 >= .. >= r_d >= 0``; the
strings of equal nonzero ``r_i`` (the subrank) determine the orbit type.
The Gram map ``X -> X^T X`` identifies unit-size shapes with trace-1
positive semidefinite m x m matrices of rank at most d.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import Configuration, _frozen, require_centered
from .errors import CollisionError, DimensionError, GeometryError

SUBRANK_TOL = 1e-9
RANK_FLOOR = 1e-12
TRACE_TOL = 1e-10
PSD_TOL = 1e-10


def _matrix(x) -> np.ndarray:
    return np.atleast_2d(np.asarray(getattr(x, "matrix", x), dtype=float))


def gram_map(x) -> np.ndarray:
    """``Y = X^T X``: the inner products of the columns of X."""
    x = _matrix(x)
    return x.T @ x


@dataclass(frozen=True, eq=False)
class CanonicalForm:
    d: int
    m: int
    r: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "r", _frozen(self.r))

    @property
    def lam(self) -> np.ndarray:
        """``lambda_i = r_i^2``, the nonzero part of the spectrum of ``X^T X``."""
        return self.r**2

    def matrix(self) -> np.ndarray:
        """``diag(r)`` embedded in a d x m zero matrix."""
        out = np.zeros((self.d, self.m))
        k = min(self.d, self.m)
        out[np.arange(k), np.arange(k)] = self.r[:k]
        return out

    def normalized(self) -> CanonicalForm:
        s = np.linalg.norm(self.r)
        return self if s == 0 else CanonicalForm(self.d, self.m, self.r / s)


def canonical_form(x) -> CanonicalForm:
    """Descending singular values of X, zero-padded to length d."""
    x = _matrix(x)
    d, m = x.shape
    r = np.zeros(d)
    sv = np.linalg.svd(x, compute_uv=False)
    r[: sv.size] = sv
    return CanonicalForm(d, m, r)


@dataclass(frozen=True)
class SubrankSignature:
    """Rank k and the lengths of the maximal strings of equal nonzero ``r_i``,
    in the order they occur in the canonical form."""

    rank: int
    kappa: tuple[int, ...]
    tol: float

    @property
    def partition(self) -> tuple[int, ...]:
        """``kappa`` as an unordered partition of k (sorted descending)."""
        return tuple(sorted(self.kappa, reverse=True))


def subrank(form: CanonicalForm, tol: float = SUBRANK_TOL) -> SubrankSignature:
    if tol < 0:
        raise ValueError("tolerance must be nonnegative")
    r = np.asarray(form.r, dtype=float)
    if r.size == 0 or r[0] <= RANK_FLOOR:
        return SubrankSignature(0, (), tol)
    scale = tol * r[0]
    k = int(np.sum(r > scale))
    kappa = []
    run = 1
    for i in range(1, k):
        if abs(r[i - 1] - r[i]) <= scale:
            run += 1
        else:
            kappa.append(run)
            run = 1
    kappa.append(run)
    return SubrankSignature(k, tuple(kappa), tol)


def dim_orthogonal(q: int) -> int:
    return q * (q - 1) // 2


@dataclass(frozen=True)
class IsotropyDescriptor:
    d: int
    m: int
    rank: int
    kappa: tuple[int, ...]

    @property
    def factors(self) -> tuple[str, str, str]:
        inner = ",".join(str(k) for k in self.kappa)
        return (f"O({self.d - self.rank})", f"ΔO({inner})", f"O({self.m - self.rank})")

    @property
    def dimension(self) -> int:
        return (
            dim_orthogonal(self.d - self.rank)
            + sum(dim_orthogonal(k) for k in self.kappa)
            + dim_orthogonal(self.m - self.rank)
        )

    def __str__(self):
        return " x ".join(self.factors)


def isotropy_descriptor(sig: SubrankSignature, d: int, m: int) -> IsotropyDescriptor:
    """Isotropy type ``O(d-k) x ΔO(k_1..k_p) x O(m-k)`` of a subrank signature."""
    k = sum(sig.kappa)
    if k != sig.rank:
        raise GeometryError("kappa does not sum to the rank")
    if k > min(d, m):
        raise DimensionError(f"rank {k} exceeds min(d, m) = {min(d, m)}")
    return IsotropyDescriptor(d, m, k, tuple(sig.kappa))


@lru_cache(maxsize=None)
def partition_count(k: int) -> int:
    """Number of partitions of k (Euler's pentagonal recurrence)."""
    if k < 0:
        return 0
    if k == 0:
        return 1
    total = 0
    j = 1
    while True:
        g1 = j * (3 * j - 1) // 2
        if g1 > k:
            break
        sign = 1 if j % 2 else -1
        total += sign * partition_count(k - g1)
        g2 = j * (3 * j + 1) // 2
        if g2 <= k:
            total += sign * partition_count(k - g2)
        j += 1
    return total


def stratum_census(d: int) -> int:
    """Number of subrank strata of unit shapes for ``m >= d``:
    ``pi(1) + .. + pi(d)``."""
    if d < 1:
        raise ValueError("d must be at least 1")
    return sum(partition_count(k) for k in range(1, d + 1))


def collision_distance(config: Configuration, i: int, j: int) -> float:
    """Kinematic distance ``sqrt(mu_ij) |a_i - a_j|`` to the collision set
    ``a_i = a_j``."""
    config = require_centered(config)
    if i == j:
        raise CollisionError("collision distance needs two distinct bodies")
    for b in (i, j):
        if not 0 <= b < config.n:
            raise GeometryError(f"body index {b} out of range")
    mu = config.masses.reduced_mass(i, j)
    return float(np.sqrt(mu) * np.linalg.norm(config.positions[i] - config.positions[j]))


def _check_shape_matrix(y) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(y, dtype=float)
    if y.ndim != 2 or y.shape[0] != y.shape[1]:
        raise DimensionError("expected a square matrix")
    if not np.all(np.isfinite(y)):
        raise GeometryError("matrix entries must be finite")
    if np.max(np.abs(y - y.T), initial=0.0) > TRACE_TOL:
        raise GeometryError("matrix is not symmetric")
    y = 0.5 * (y + y.T)
    if abs(np.trace(y) - 1.0) > TRACE_TOL:
        raise GeometryError(f"trace is {np.trace(y):.17g}, expected 1")
    ev = np.linalg.eigvalsh(y)
    if ev[0] < -PSD_TOL:
        raise GeometryError(f"matrix has negative eigenvalue {ev[0]:.3g}")
    return y, ev


def linear_model_embed(y) -> np.ndarray:
    """``Y_0 = (Y - Id/m) / sqrt(1 - 1/m)`` for trace-1 PSD ``Y``.

    The image lies in the unit ball of traceless symmetric matrices and
    meets the unit sphere exactly at the rank-1 matrices.
    """
    y, _ = _check_shape_matrix(y)
    m = y.shape[0]
    if m < 2:
        raise DimensionError("the linear model needs m >= 2")
    return (y - np.eye(m) / m) / np.sqrt(1.0 - 1.0 / m)


def boundary_model_map(y) -> np.ndarray:
    """``Y_0 / |Y_0|`` for a singular trace-1 PSD matrix ``Y``."""
    y, ev = _check_shape_matrix(y)
    if ev[0] > PSD_TOL:
        raise GeometryError("matrix has full rank; only singular matrices have a boundary image")
    y0 = linear_model_embed(y)
    return y0 / np.linalg.norm(y0)
