import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.spatial import ConvexHull

from oracles import log_binomial_exact
from polythresh.core import (DegenerateInputError, Polygon2D, SeedSpec, convex_hull_2d,
                             halfplane_polygon_measure, hull_area_2d, log_binomial, rng_stream,
                             triangle_areas)


def test_same_seed_same_stream():
    a = rng_stream(SeedSpec(42, 3)).random(1_000_000)
    b = rng_stream(SeedSpec(42, 3)).random(1_000_000)
    assert np.array_equal(a, b)


def test_streams_differ():
    a = rng_stream(SeedSpec(42, 0)).random(1_000_000)
    b = rng_stream(SeedSpec(42, 1)).random(1_000_000)
    assert np.mean(a != b) > 0.99


def test_uniform_mean():
    assert abs(rng_stream(SeedSpec(7)).random(1_000_000).mean() - 0.5) < 0.002


def test_child_streams_are_distinct():
    s = SeedSpec(1, 5)
    ids = {s.child(r).stream_id for r in range(1000)}
    assert len(ids) == 1000 and s.stream_id not in ids


@pytest.mark.parametrize("bad", [-1, 2 ** 64])
def test_seed_range(bad):
    with pytest.raises(ValueError):
        SeedSpec(bad)


def test_log_binomial_examples():
    assert log_binomial(5, 2) == pytest.approx(math.log(10), rel=1e-15)
    assert log_binomial(17, 0) == 0.0
    assert log_binomial(10 ** 6, 20) == pytest.approx(log_binomial_exact(10 ** 6, 20), rel=1e-10)


@pytest.mark.parametrize("N,n", [(3, 4), (-1, 0), (5, -1)])
def test_log_binomial_domain(N, n):
    with pytest.raises(ValueError):
        log_binomial(N, n)


@given(st.integers(0, 5000), st.data())
def test_log_binomial_symmetric_and_exact(N, data):
    n = data.draw(st.integers(0, N))
    assert log_binomial(N, n) == pytest.approx(log_binomial(N, N - n), rel=1e-12, abs=1e-12)
    if 0 < n < N:
        assert log_binomial(N, n) == pytest.approx(log_binomial_exact(N, n), rel=1e-10)


def test_halfplane_examples():
    unit = Polygon2D.box(0, 1)
    assert halfplane_polygon_measure(unit, (1, 0), Fraction(1, 2)) == Fraction(1, 2)
    assert halfplane_polygon_measure(unit, (1, 0), 5) == 1
    sq = Polygon2D.box(-1, 1)
    d = (1 / math.sqrt(2), 1 / math.sqrt(2))
    assert halfplane_polygon_measure(sq, d, 0.0) == pytest.approx(2.0, abs=1e-12)


def test_halfplane_errors():
    with pytest.raises(ValueError):
        halfplane_polygon_measure(Polygon2D.box(), (0, 0), 0)
    with pytest.raises(DegenerateInputError):
        Polygon2D(((0, 0), (1, 1)))
    with pytest.raises(ValueError):
        Polygon2D(((0, 0), (0, 1), (1, 0)))  # clockwise


@given(st.floats(0, 2 * math.pi), st.floats(-2, 2), st.floats(-2, 2))
def test_halfplane_complement_and_monotone(phi, t, s):
    P = Polygon2D(((-1, -1), (2, -1), (1.5, 1), (-1, 0.5)))
    d = (math.cos(phi), math.sin(phi))
    both = halfplane_polygon_measure(P, d, t) + halfplane_polygon_measure(P, (-d[0], -d[1]), -t)
    assert both == pytest.approx(float(P.area), abs=1e-12)
    lo, hi = sorted((t, s))
    assert halfplane_polygon_measure(P, d, lo) <= halfplane_polygon_measure(P, d, hi) + 1e-12


@given(st.integers(3, 60), st.integers(0, 2 ** 32))
def test_hull_2d_matches_scipy(m, seed):
    pts = np.random.default_rng(seed).standard_normal((m, 2))
    ref = ConvexHull(pts)
    assert set(convex_hull_2d(pts)) == set(ref.vertices)
    assert hull_area_2d(pts) == pytest.approx(ref.volume, rel=1e-12)


def test_triangle_areas():
    a = np.array([[0.0, 0.0]])
    assert triangle_areas(a, np.array([[1.0, 0.0]]), np.array([[0.0, 1.0]]))[0] == 0.5
