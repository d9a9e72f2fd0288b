from itertools import combinations

import numpy as np
import pytest

from nbodygeom.core import Configuration, center
from nbodygeom.errors import CollisionError, DimensionError, GeometryError
from nbodygeom.jacobi import jacobi_vectors
from nbodygeom.rootsys import standard_roots
from nbodygeom.shape import (
    CanonicalForm,
    SubrankSignature,
    boundary_model_map,
    canonical_form,
    collision_distance,
    gram_map,
    isotropy_descriptor,
    linear_model_embed,
    partition_count,
    stratum_census,
    subrank,
)

from conftest import random_centered, random_orthogonal, rel_err


def partitions(k, largest=None):
    """All partitions of k, by direct recursion."""
    largest = k if largest is None else largest
    if k == 0:
        yield ()
        return
    for first in range(min(k, largest), 0, -1):
        for rest in partitions(k - first, first):
            yield (first,) + rest


def test_gram_map(rng):
    assert np.array_equal(gram_map(np.eye(3)), np.eye(3))
    q = random_orthogonal(rng, 5)[:, :3]
    assert np.allclose(gram_map(q), np.eye(3))
    x = rng.normal(size=(3, 5))
    ev = np.sort(np.linalg.eigvalsh(gram_map(x)))[::-1][:3]
    sv = np.linalg.svd(x, compute_uv=False)
    assert np.max(np.abs(ev - sv**2)) < 1e-12
    psi, phi = random_orthogonal(rng, 3), random_orthogonal(rng, 5)
    lhs = gram_map(psi @ x @ phi.T)
    assert np.max(np.abs(lhs - phi @ gram_map(x) @ phi.T)) < 1e-12


def test_gram_rank(rng):
    x = rng.normal(size=(3, 2)) @ rng.normal(size=(2, 5))
    assert np.linalg.matrix_rank(gram_map(x), tol=1e-9) == np.linalg.matrix_rank(x, tol=1e-9) == 2


def test_canonical_form_examples(rng):
    f = canonical_form(np.array([[2.0, 0, 0], [0, 1.0, 0]]))
    assert np.allclose(f.r, [2, 1])
    assert np.all(canonical_form(np.zeros((3, 4))).r == 0)
    x = rng.normal(size=(3, 4))
    f = canonical_form(x)
    ev = np.sort(np.linalg.eigvalsh(x.T @ x))[::-1][:3]
    assert np.max(np.abs(f.lam - ev)) < 1e-12
    assert f.lam.sum() == pytest.approx(np.sum(x**2))
    assert np.allclose(canonical_form(f.matrix()).r, f.r)


def test_canonical_form_invariance_and_padding(rng):
    x = rng.normal(size=(3, 5))
    r = canonical_form(x).r
    for _ in range(20):
        y = random_orthogonal(rng, 3) @ x @ random_orthogonal(rng, 5).T
        assert np.max(np.abs(canonical_form(y).r - r)) < 1e-10
    padded = canonical_form(np.vstack([x, np.zeros(5)])).r
    assert np.allclose(padded[:3], r) and padded[3] == 0
    wide = canonical_form(rng.normal(size=(4, 2)))
    assert wide.r.size == 4 and np.all(wide.r[2:] == 0)


def test_weyl_reconstruction(rng):
    x = rng.normal(size=(3, 4))
    y = random_orthogonal(rng, 3) @ x  # same Gram matrix
    assert np.allclose(gram_map(x), gram_map(y))
    assert np.allclose(canonical_form(x).r, canonical_form(y).r)


@pytest.mark.parametrize(
    "r, rank, kappa",
    [
        ((1 / np.sqrt(2), 1 / np.sqrt(2), 0), 2, (2,)),
        ((1, 0, 0), 1, (1,)),
        ((1 / np.sqrt(3),) * 3, 3, (3,)),
        ((0.8, 0.4, 0.4), 3, (1, 2)),
        ((0, 0, 0), 0, ()),
    ],
)
def test_subrank_examples(r, rank, kappa):
    sig = subrank(CanonicalForm(3, 3, np.array(r, float)))
    assert sig.rank == rank and sig.kappa == kappa


def test_subrank_errors_and_partition():
    with pytest.raises(ValueError):
        subrank(CanonicalForm(3, 3, np.ones(3)), -1.0)
    sig = SubrankSignature(3, (1, 2), 1e-9)
    assert sig.partition == (2, 1)


def test_isotropy_descriptor():
    d, m = 3, 7
    principal = isotropy_descriptor(SubrankSignature(3, (1, 1, 1), 1e-9), d, m)
    assert principal.dimension == (m - d) * (m - d - 1) // 2
    assert principal.factors == ("O(0)", "ΔO(1,1,1)", "O(4)")
    full = isotropy_descriptor(SubrankSignature(3, (3,), 1e-9), d, m)
    assert full.factors[0] == "O(0)" and full.dimension == 3 + 6
    assert isotropy_descriptor(SubrankSignature(3, (2, 1), 1e-9), 3, 4).dimension == 1
    with pytest.raises(DimensionError):
        isotropy_descriptor(SubrankSignature(4, (4,), 1e-9), 3, 5)


def test_stratum_census():
    assert stratum_census(1) == 1
    assert stratum_census(3) == 6
    assert stratum_census(5) == 18
    for d in range(1, 11):
        assert stratum_census(d) == sum(len(list(partitions(k))) for k in range(1, d + 1))
    assert partition_count(50) == 204226
    with pytest.raises(ValueError):
        stratum_census(0)


def test_census_matches_observed_signatures(rng):
    # sample canonical forms with prescribed equalities in d = 3; every
    # unordered partition of every rank 1..3 occurs
    seen = set()
    for _ in range(400):
        k = int(rng.integers(1, 4))
        groups = []
        left = k
        while left:
            g = int(rng.integers(1, left + 1))
            groups.append(g)
            left -= g
        vals = np.sort(rng.uniform(0.1, 1, len(groups)))[::-1]
        r = np.concatenate([np.repeat(vals, groups), np.zeros(3 - k)])
        sig = subrank(CanonicalForm(3, 4, r))
        seen.add(sig.partition)
    assert len(seen) == stratum_census(3)


def test_collision_distance(rng):
    cfg = Configuration([[1, 0, 0], [-1, 0, 0]], [1, 1])
    assert collision_distance(cfg, 0, 1) == pytest.approx(np.sqrt(2))
    same, _ = center(Configuration([[1, 1, 1], [1, 1, 1], [0, 0, 0]], [1, 2, 3]))
    assert collision_distance(same, 0, 1) == 0.0
    with pytest.raises(CollisionError):
        collision_distance(cfg, 1, 1)
    for _ in range(20):
        cfg = random_centered(rng, 5)
        m, a = cfg.m, cfg.positions
        s = standard_roots(cfg.masses)
        x = jacobi_vectors(cfg)
        for i, j in combinations(range(5), 2):
            # nearest collision point: the pair merged at its own center of mass
            c = (m[i] * a[i] + m[j] * a[j]) / (m[i] + m[j])
            y = a.copy()
            y[i] = y[j] = c
            nearest = np.sqrt(np.sum(m * np.sum((y - a) ** 2, axis=1)))
            delta = collision_distance(cfg, i, j)
            assert abs(delta - nearest) < 1e-12 * max(1, nearest)
            assert abs(delta - np.linalg.norm(x.matrix @ s.u(i, j))) < 1e-12


def test_linear_model_examples():
    for m in (2, 3, 5):
        assert np.allclose(linear_model_embed(np.eye(m) / m), 0)
        e = np.zeros((m, m))
        e[0, 0] = 1
        assert np.linalg.norm(linear_model_embed(e)) == pytest.approx(1)
    y0 = linear_model_embed(np.diag([0.5, 0.5, 0]))
    assert np.allclose(y0, np.sqrt(1.5) * np.diag([1 / 6, 1 / 6, -1 / 3]))
    assert np.linalg.norm(y0) == pytest.approx(0.5)


def test_linear_model_rejects():
    with pytest.raises(GeometryError):
        linear_model_embed(np.eye(3))
    with pytest.raises(GeometryError):
        linear_model_embed(np.diag([1.5, -0.5]))
    with pytest.raises(DimensionError):
        linear_model_embed(np.ones((2, 3)))


def test_linear_model_equivariant(rng):
    w = rng.dirichlet(np.ones(4))
    q = random_orthogonal(rng, 4)
    y = q @ np.diag(w) @ q.T
    g = random_orthogonal(rng, 4)
    assert np.allclose(linear_model_embed(g @ y @ g.T), g @ linear_model_embed(y) @ g.T)


def test_boundary_model_map():
    out = boundary_model_map(np.diag([1.0, 0, 0]))
    assert np.allclose(out, np.diag([2, -1, -1]) / np.sqrt(6))
    assert np.allclose(boundary_model_map(np.diag([1.0, 0])), np.diag([1, -1]) / np.sqrt(2))
    out = boundary_model_map(np.diag([0.25, 0.25, 0.5, 0]))
    assert out[0, 0] == pytest.approx(out[1, 1])
    with pytest.raises(GeometryError):
        boundary_model_map(np.eye(3) / 3)
