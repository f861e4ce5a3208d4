import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog
from scipy.spatial import ConvexHull

from oracles import exact_polygon_contains
from polythresh.core import SeedSpec
from polythresh.hull import (DimensionError, build_hull, hull_volume, membership,
                             membership_batch, volume_ratio_mc)
from polythresh.samplers import make_spec


def test_simplex_hull():
    pts = np.vstack([np.zeros(3), np.eye(3)])
    h = build_hull(pts)
    assert len(h.facets) == 4 and sorted(h.vertices) == [0, 1, 2, 3]
    assert hull_volume(h) == pytest.approx(1 / 6, rel=1e-14)


def test_square_with_interior_point():
    pts = np.array([[1.0, 1], [-1, 1], [-1, -1], [1, -1], [0, 0]])
    h = build_hull(pts)
    assert sorted(h.vertices) == [0, 1, 2, 3]
    assert hull_volume(h) == pytest.approx(4.0)


def test_all_points_inside_facets():
    pts = np.random.default_rng(0).uniform(-1, 1, (100, 2))
    h = build_hull(pts)
    assert np.all(pts @ h.normals.T - h.offsets <= 1e-9)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
@given(seed=st.integers(0, 2 ** 32))
def test_volume_matches_scipy(n, seed):
    pts = np.random.default_rng(seed).standard_normal((40, n))
    assert hull_volume(build_hull(pts)) == pytest.approx(ConvexHull(pts).volume, rel=1e-9)


def test_neighbors_are_symmetric():
    h = build_hull(np.random.default_rng(1).standard_normal((60, 3)))
    nb = h.neighbors()
    for f, others in enumerate(nb):
        assert all(f in nb[g] for g in others)


def test_dimension_cutoff():
    with pytest.raises(DimensionError):
        build_hull(np.random.default_rng(0).standard_normal((20, 9)))


def test_ball_hull_against_membership_mc():
    rng = np.random.default_rng(3)
    g = rng.standard_normal((1000, 3))
    pts = g / np.linalg.norm(g, axis=1, keepdims=True) * rng.uniform(0, 1, (1000, 1)) ** (1 / 3)
    vol = hull_volume(build_hull(pts))
    probes = rng.uniform(-1, 1, (20_000, 3))
    inside, indet = membership_batch(probes, pts)
    p = inside.mean()
    se = 8 * math.sqrt(p * (1 - p) / len(probes))
    assert indet.sum() == 0
    assert abs(8 * p - vol) < 3 * se


def test_membership_examples():
    pts = np.random.default_rng(4).standard_normal((30, 4))
    assert membership(pts.mean(axis=0), pts).inside
    y = pts.mean(axis=0)
    y[0] = pts[:, 0].max() + 0.5
    res = membership(y, pts)
    assert res.inside is False
    assert np.max((pts - y) @ res.separator) < 0


@given(st.integers(5, 80), st.integers(2, 6), st.integers(0, 2 ** 32))
def test_membership_certificates_and_lp(m, n, seed):
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((m, n))
    y = rng.standard_normal(n) * 1.2
    res = membership(y, pts)
    lp = linprog(np.zeros(m), A_eq=np.vstack([pts.T, np.ones(m)]), b_eq=np.append(y, 1.0),
                 bounds=(0, None), method="highs")
    if res.inside:
        w = np.zeros(m)
        w[res.support] = res.weights
        assert np.linalg.norm(w @ pts - y) <= 1e-9 * np.ptp(pts, axis=0).max() + 1e-12
        assert lp.status == 0
    elif res.inside is False:
        assert np.max((pts - y) @ res.separator) < 0
        assert lp.status == 2


def test_membership_vs_exact_polygon():
    rng = np.random.default_rng(5)
    P = rng.uniform(-1, 1, (40, 2))
    Y = rng.uniform(-1.2, 1.2, (2000, 2))
    inside, indet = membership_batch(Y, P, tol=1e-9)
    assert not indet.any()
    assert all(inside[i] == exact_polygon_contains(P, Y[i]) for i in range(len(Y)))


def test_ratio_degenerate_and_bounds():
    assert volume_ratio_mc(make_spec("ball", 3), 3, 5, 20, SeedSpec(1)).mean == 0.0
    est = volume_ratio_mc(make_spec("cube_solid", 3), 30, 20, 50, SeedSpec(1))
    assert np.all((est.per_replication >= 0) & (est.per_replication <= 1))


def test_ratio_ball_saturation():
    est = volume_ratio_mc(make_spec("ball", 2), 10_000, 5, 200, SeedSpec(2))
    assert est.exact_mean >= 0.95 and est.mean >= 0.95


@pytest.mark.parametrize("kind,n,N", [("cube_solid", 2, 8), ("ball", 3, 25), ("beta", 4, 40)])
def test_mc_agrees_with_exact_hulls(kind, n, N):
    spec = make_spec(kind, n, beta=1.0 if kind == "beta" else None)
    est = volume_ratio_mc(spec, N, 300, 100, SeedSpec(6))
    pooled = math.hypot(est.stderr, est.exact_stderr)
    assert abs(est.mean - est.exact_mean) < 3 * pooled


def test_ratio_monotone_in_N():
    spec = make_spec("cube_solid", 3)
    means = [volume_ratio_mc(spec, N, 200, 100, SeedSpec(7)) for N in (8, 20, 60)]
    for a, b in zip(means, means[1:]):
        assert b.mean >= a.mean - 3 * math.hypot(a.stderr, b.stderr)


def test_ratio_independent_of_jobs():
    spec = make_spec("cube_vertices", 6)
    a = volume_ratio_mc(spec, 30, 16, 40, SeedSpec(8), jobs=1)
    b = volume_ratio_mc(spec, 30, 16, 40, SeedSpec(8), jobs=3)
    assert np.array_equal(a.per_replication, b.per_replication)
