"""Central configurations, with the collinear ones found chamber by chamber.

A collinear configuration with unit moment of inertia is a unit vector
``x`` in (n-1)-space (the single row of its Jacobi matrix).  The root
functionals ``omega_ij(x) = w_ij . x = a_i - a_j`` cut the sphere into n!
chambers, one per ordering of the bodies on the line, and the Newtonian
potential restricted to a chamber has exactly one critical point.  Antipodal
chambers describe the same shapes, so there are n!/2 collinear central
configurations (Moulton).
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from itertools import permutations

import numpy as np
from scipy.optimize import brentq

from .core import (
    CenteredConfiguration,
    Configuration,
    MassDistribution,
    _frozen,
    as_masses,
    center,
    require_centered,
)
from .errors import CollisionError, ConvergenceError, DimensionError, WallError
from .jacobi import JacobiCoefficients, forward, inverse, standard_coefficients
from .rootsys import WeightedRootSystem, standard_roots

WALL_TOL = 1e-12
WALL_GUARD = 1e-10
MAX_REJECTIONS = 50
_EPS = np.finfo(float).eps


# -- general configurations ------------------------------------------------


def _pair_distances(positions):
    diff = positions[:, None, :] - positions[None, :, :]
    return diff, np.linalg.norm(diff, axis=2)


def newtonian_potential(config: Configuration) -> float:
    """``U = sum_{i<j} m_i m_j / |a_i - a_j|``."""
    m = config.m
    _, r = _pair_distances(config.positions)
    iu = np.triu_indices(config.n, 1)
    if np.any(r[iu] == 0):
        raise CollisionError("two bodies coincide")
    return float(np.sum(np.outer(m, m)[iu] / r[iu]))


def central_residual(config: Configuration) -> tuple[float, float]:
    """Relative defect of the central-configuration equations.

    Returns ``(residual, lam)`` with ``lam = -U / I`` and ``residual`` the
    largest ``|lam a_i - sum_j m_j (a_j - a_i) / r_ij^3|`` divided by
    ``|lam| max |a_i|``.
    """
    config = require_centered(config)
    m = config.m
    a = config.positions
    diff, r = _pair_distances(a)
    off = ~np.eye(config.n, dtype=bool)
    if np.any(r[off] == 0):
        raise CollisionError("two bodies coincide")
    u = newtonian_potential(config)
    lam = -u / config.moment_of_inertia()
    inv3 = np.where(off, 1.0 / np.where(off, r, 1.0) ** 3, 0.0)
    # sum_j m_j (a_j - a_i) / r_ij^3 ; diff[i, j] = a_i - a_j
    force = -np.einsum("ij,j,ijk->ik", inv3, m, diff)
    defect = np.linalg.norm(lam * a - force, axis=1)
    scale = abs(lam) * np.max(np.linalg.norm(a, axis=1))
    return float(np.max(defect) / scale), float(lam)


# -- chambers ---------------------------------------------------------------


@dataclass(frozen=True)
class ChamberSpec:
    """A chamber of the collinear sphere, given by the order of the bodies.

    ``ordering[0]`` is the body with the largest coordinate; the chamber is
    ``a_{ordering[0]} > a_{ordering[1]} > ...``.
    """

    ordering: tuple[int, ...]

    def __post_init__(self):
        order = tuple(int(i) for i in self.ordering)
        if sorted(order) != list(range(len(order))):
            raise DimensionError(f"{order} is not an ordering of the bodies")
        object.__setattr__(self, "ordering", order)

    @property
    def n(self) -> int:
        return len(self.ordering)

    @cached_property
    def signs(self) -> dict[tuple[int, int], int]:
        """``eps_ij`` for ``i < j``: +1 when body i lies above body j."""
        rank = {b: r for r, b in enumerate(self.ordering)}
        return {
            (i, j): (1 if rank[i] < rank[j] else -1)
            for i in range(self.n)
            for j in range(i + 1, self.n)
        }

    def sign_vector(self) -> np.ndarray:
        """Signs aligned with the lexicographic pair order of a root table."""
        s = self.signs
        return np.array([s[p] for p in sorted(s)], dtype=float)

    @property
    def is_fundamental(self) -> bool:
        return self.ordering == tuple(range(self.n))

    def antipode(self) -> ChamberSpec:
        return ChamberSpec(self.ordering[::-1])

    @property
    def is_representative(self) -> bool:
        """True for the member of each antipodal pair listed first."""
        return self.ordering[0] < self.ordering[-1]

    @property
    def rank(self) -> int:
        """Lexicographic rank of ``ordering`` among all n! permutations."""
        rest = list(range(self.n))
        r = 0
        for k, b in enumerate(self.ordering):
            idx = rest.index(b)
            r += idx * math.factorial(self.n - 1 - k)
            rest.pop(idx)
        return r

    @classmethod
    def from_signs(cls, signs: dict[tuple[int, int], int], n: int) -> ChamberSpec:
        above = [sum(1 for j in range(n) if j != i and _sign(signs, i, j) > 0) for i in range(n)]
        if sorted(above) != list(range(n)):
            raise DimensionError("sign pattern is not a total order")
        return cls(tuple(sorted(range(n), key=lambda i: -above[i])))


def _sign(signs, i, j):
    return signs[(i, j)] if i < j else -signs[(j, i)]


def all_chambers(n: int) -> list[ChamberSpec]:
    """All n! chambers, in lexicographic order of their orderings."""
    return [ChamberSpec(p) for p in permutations(range(n))]


def representative_chambers(n: int) -> list[ChamberSpec]:
    """One chamber per antipodal pair, n!/2 of them, in rank order."""
    return [c for c in all_chambers(n) if c.is_representative]


def chamber_of(x, roots: WeightedRootSystem) -> ChamberSpec:
    """Chamber containing the collinear point ``x``."""
    x = np.asarray(x, dtype=float)
    omega = roots.roots @ x
    if np.any(np.abs(omega) <= WALL_TOL * np.linalg.norm(x)):
        raise WallError("point lies on a collision wall")
    signs = {p: int(np.sign(o)) for p, o in zip(roots.pairs, omega)}
    return ChamberSpec.from_signs(signs, roots.n)


def chamber_start(
    chamber: ChamberSpec,
    coeffs: JacobiCoefficients,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Unit point inside ``chamber``: equally spaced bodies in the chamber's
    order (random gaps when ``rng`` is given), centered and scaled to I = 1."""
    n = chamber.n
    gaps = np.ones(n - 1) if rng is None else rng.uniform(0.2, 1.8, n - 1)
    coords = np.concatenate([[0.0], -np.cumsum(gaps)])
    a = np.empty(n)
    a[list(chamber.ordering)] = coords
    cfg, _ = center(Configuration(a[:, None], coeffs.masses))
    x = forward(coeffs, cfg).matrix[0]
    return x / np.linalg.norm(x)


# -- collinear potential ----------------------------------------------------


def _omega(x, roots):
    omega = roots.roots @ x
    if np.any(omega == 0):
        raise WallError("point lies on a collision wall")
    return omega


def collinear_potential(x, roots: WeightedRootSystem) -> tuple[float, np.ndarray]:
    """``U(x) = sum m_i m_j / |omega_ij(x)|`` and its gradient."""
    x = np.asarray(x, dtype=float)
    omega = _omega(x, roots)
    mm = roots.pair_weights
    u = float(np.sum(mm / np.abs(omega)))
    grad = -(mm * np.sign(omega) / omega**2) @ roots.roots
    return u, grad


def collinear_hessian(x, roots: WeightedRootSystem) -> np.ndarray:
    """Hessian ``2 sum m_i m_j w_ij w_ij^T / |omega_ij(x)|^3``."""
    x = np.asarray(x, dtype=float)
    omega = _omega(x, roots)
    c = 2.0 * roots.pair_weights / np.abs(omega) ** 3
    return (roots.roots.T * c) @ roots.roots


def tangent_residual(x, roots: WeightedRootSystem) -> float:
    """``|grad U(x) + U(x) x| / U(x)``, zero at a collinear central configuration."""
    u, g = collinear_potential(x, roots)
    return float(np.linalg.norm(g + u * x) / u)


@dataclass(frozen=True, eq=False)
class CollinearSolution:
    """A collinear central configuration with unit moment of inertia."""

    x: np.ndarray
    chamber: ChamberSpec
    potential: float
    multiplier: float
    residual: float
    iterations: int
    positions: np.ndarray
    gaps: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "x", _frozen(self.x))
        object.__setattr__(self, "positions", _frozen(self.positions))
        object.__setattr__(self, "gaps", _frozen(-np.diff(self.positions)))

    def configuration(self, masses, dim: int = 3) -> CenteredConfiguration:
        """The solution placed on the first axis of d-space."""
        a = np.zeros((self.positions.size, dim))
        a[:, 0] = self.positions
        return CenteredConfiguration._exact(a, as_masses(masses))


@dataclass(frozen=True)
class DescentOptions:
    """Controls for :func:`spherical_descent`.

    ``damping`` is the initial (and largest) step length; the unmodified
    iteration is ``damping = 1``.  The step is halved whenever a trial point
    would raise U beyond rounding, leave the chamber, or come within
    ``WALL_GUARD`` of a wall, and doubled again after a step accepted at full
    length.  Once the
    residual drops below ``polish_below`` a few projected Newton steps finish
    the solve (set it to 0 to run the plain iteration to the end).
    """

    max_iter: int = 100_000
    tol: float = 1e-12
    damping: float = 1.0
    polish_below: float = 1e-4


def _sphere_newton_step(y, u, g, roots):
    # Riemannian Newton on the sphere: Hess = P (D2U + U Id) P on the tangent
    # space, positive definite inside a chamber since D2U is.
    h = collinear_hessian(y, roots) + u * np.eye(y.size)
    p = np.eye(y.size) - np.outer(y, y)
    tang = p @ (g + u * y)
    a = p @ h @ p + np.outer(y, y)
    return -np.linalg.solve(a, tang)


def spherical_descent(
    start,
    roots: WeightedRootSystem,
    opts: DescentOptions | None = None,
    coeffs: JacobiCoefficients | None = None,
) -> CollinearSolution:
    """Critical point of U on the spherical chamber containing ``start``.

    Iterates ``y <- normalize(y - eta (grad U(y) + U(y) y))``.
    """
    opts = opts or DescentOptions()
    coeffs = coeffs or standard_coefficients(roots.masses)
    y = np.asarray(start, dtype=float)
    y = y / np.linalg.norm(y)
    chamber = chamber_of(y, roots)
    eps = chamber.sign_vector()

    def admissible(z):
        return np.all(eps * (roots.roots @ z) > WALL_GUARD)

    u, g = collinear_potential(y, roots)
    eta = opts.damping
    rejections = 0
    res = np.linalg.norm(g + u * y) / u
    it = 0
    while res > opts.tol:
        if it >= opts.max_iter:
            raise ConvergenceError(
                f"no convergence in {opts.max_iter} iterations (residual {res:.3e})",
                residual=res,
                iterations=it,
            )
        it += 1
        newton = res < opts.polish_below
        if newton:
            step = _sphere_newton_step(y, u, g, roots)
            scale = 1.0
        else:
            step = -(g + u * y)
            scale = eta
        while True:
            z = y + scale * step
            z = z / np.linalg.norm(z)
            if admissible(z):
                uz, gz = collinear_potential(z, roots)
                # near the minimum changes of U drop below rounding, so the
                # residual decides there
                rz = np.linalg.norm(gz + uz * z) / uz
                if newton:
                    if rz < res:
                        break
                elif uz <= u or (uz <= u * (1.0 + 8.0 * _EPS) and rz < res):
                    break
            scale *= 0.5
            rejections += 1
            if rejections >= MAX_REJECTIONS:
                raise ConvergenceError(
                    f"step rejected {MAX_REJECTIONS} times in a row (residual {res:.3e})",
                    residual=res,
                    iterations=it,
                )
        if not newton:
            # let the step length recover after a run of accepted steps
            eta = min(opts.damping, 2.0 * scale) if scale == eta else scale
        rejections = 0
        y, u, g, res = z, uz, gz, rz
    if chamber_of(y, roots) != chamber:
        raise WallError("descent left its starting chamber")
    positions = (coeffs.inverse_matrix @ y[:, None])[:, 0]
    return CollinearSolution(
        x=y,
        chamber=chamber,
        potential=u,
        multiplier=-u,
        residual=float(res),
        iterations=it,
        positions=positions,
    )


class PartialSolveError(ConvergenceError):
    """Some chambers of a Moulton enumeration failed to converge."""

    def __init__(self, message, failed, solutions):
        super().__init__(message)
        self.failed = failed
        self.solutions = solutions


def solve_chamber(
    chamber: ChamberSpec,
    roots: WeightedRootSystem,
    opts: DescentOptions | None = None,
    seed: int | None = None,
    coeffs: JacobiCoefficients | None = None,
) -> CollinearSolution:
    """Collinear central configuration of one chamber."""
    coeffs = coeffs or standard_coefficients(roots.masses)
    rng = None if seed is None else np.random.default_rng([seed, chamber.rank])
    return spherical_descent(chamber_start(chamber, coeffs, rng), roots, opts, coeffs)


def moulton_solve_all(
    masses,
    opts: DescentOptions | None = None,
    seed: int | None = None,
    workers: int | None = None,
) -> list[CollinearSolution]:
    """The n!/2 collinear central configurations, one per antipodal pair of
    chambers, ordered by chamber rank.

    Chambers are solved independently; ``workers > 1`` spreads them over a
    thread pool without changing the result.
    """
    masses = as_masses(masses)
    if masses.n < 2:
        raise DimensionError("collinear configurations need at least two bodies")
    roots = standard_roots(masses)
    coeffs = standard_coefficients(masses)
    chambers = representative_chambers(masses.n)

    def job(ch):
        try:
            return solve_chamber(ch, roots, opts, seed, coeffs)
        except (ConvergenceError, WallError) as exc:
            return exc

    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(job, chambers))
    else:
        results = [job(ch) for ch in chambers]
    failed = [ch for ch, r in zip(chambers, results) if isinstance(r, Exception)]
    solutions = [r for r in results if not isinstance(r, Exception)]
    if failed:
        names = ", ".join(str(ch.ordering) for ch in failed)
        raise PartialSolveError(
            f"{len(failed)} of {len(chambers)} chambers failed: {names}", failed, solutions
        )
    return solutions


# -- three bodies -------------------------------------------------------------


def euler_quintic(masses) -> tuple[np.ndarray, float]:
    """Euler's degree-5 equation for the collinear three-body configuration
    ``a_0 > a_1 > a_2``.

    With gaps ``t_1 = a_0 - a_1 = omega t`` and ``t_2 = a_1 - a_2 = (1 - omega) t``
    and masses scaled to total 1, eliminating the multiplier from the two
    relative equations of motion leaves ``P(omega) = 0``.  Returns the
    coefficients of P, highest degree first, and its unique root in (0, 1).
    The gap ratio is ``omega / (1 - omega)``.
    """
    masses = as_masses(masses)
    if masses.n != 3:
        raise DimensionError("the Euler quintic is defined for three bodies")
    m1, m2, m3 = masses.masses / masses.total
    P = np.polynomial.Polynomial
    w = P([0.0, 1.0])
    v = 1.0 - w
    a1 = -m1 * v**2 + (1.0 - m1) * w**2 + m1 * w**2 * v**2
    a2 = (m2 + m3 * w**2) * v**2
    lin = (1.0 - m1) * w + m3 * v
    poly = a1 * lin - a2 * v
    coef = np.zeros(6)
    coef[: poly.coef.size] = poly.coef
    omega = brentq(poly, 0.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    dpoly = poly.deriv()
    for _ in range(3):
        d = dpoly(omega)
        if d == 0:
            break
        nxt = omega - poly(omega) / d
        if not 0.0 < nxt < 1.0 or abs(poly(nxt)) > abs(poly(omega)):
            break
        omega = nxt
    return coef[::-1].copy(), float(omega)


def gap_ratio(solution: CollinearSolution) -> float:
    """``t_1 / t_2`` of a three-body solution in its chamber order."""
    a = solution.positions[list(solution.chamber.ordering)]
    return float((a[0] - a[1]) / (a[1] - a[2]))
