import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polythresh.bodies import (centroid_outer_volume, centroid_support, centroid_support_many,
                               inclusion_check_LqZ, paouris_ratio, reverse_inclusion_check,
                               sample_rate_level_set)
from polythresh.core import SeedSpec
from polythresh.depth import cramer_rate
from polythresh.samplers import ball_volume, isotropize, make_spec, sample


def test_support_examples():
    assert centroid_support(make_spec("cube_solid", 1), 2, [1.0]) == pytest.approx(1 / math.sqrt(3), rel=1e-13)
    assert centroid_support(make_spec("ball", 3), 2, [0, 0, 1.0]) == pytest.approx(1 / math.sqrt(5), rel=1e-13)


@pytest.mark.parametrize("kind", ["cube_solid", "cube_vertices", "ball", "beta"])
@given(theta=st.lists(st.floats(-1, 1), min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 0.1))
def test_isotropic_second_moment_support_is_one(kind, theta):
    spec = make_spec(kind, 3, beta=2.0 if kind == "beta" else None, isotropic=True)
    th = np.array(theta) / np.linalg.norm(theta)
    assert centroid_support(spec, 2, th) == pytest.approx(1.0, rel=1e-10)


@pytest.mark.parametrize("alpha", [1.0, 2.5, 3.0])
def test_cube_moment_against_mc(alpha):
    spec = make_spec("cube_solid", 3)
    th = np.array([0.3, -0.5, 0.8])
    X = sample(spec, 400_000, SeedSpec(1)).points @ th
    v = np.abs(X) ** alpha
    got = centroid_support(spec, alpha, th) ** alpha
    assert abs(got - v.mean()) < 4 * v.std() / math.sqrt(len(v))


@given(st.floats(1, 3), st.floats(0, 3), st.floats(0, 2 * math.pi))
def test_support_monotone_and_symmetric(a, da, phi):
    spec = make_spec("cube_solid", 2)
    th = np.array([math.cos(phi), math.sin(phi)])
    h = centroid_support(spec, a, th)
    assert centroid_support(spec, a + da, th) >= h * (1 - 1e-10)
    assert centroid_support(spec, a, -th) == pytest.approx(h, rel=1e-12)


def test_outer_volume_axes_only_is_box():
    spec = make_spec("cube_solid", 3, isotropic=True)
    cb = centroid_outer_volume(spec, 2, directions=None, probes=10_000)
    assert cb.outer_volume == pytest.approx(8.0, rel=1e-12)


def test_outer_volume_many_directions_tends_to_ball():
    spec = make_spec("ball", 2, isotropic=True)
    cb = centroid_outer_volume(spec, 2, M=512, probes=400_000, seed=SeedSpec(2))
    assert cb.outer_volume == pytest.approx(math.pi, abs=4 * cb.stderr + 1e-3)


def test_outer_volume_reference_run():
    spec = make_spec("cube_solid", 3, isotropic=True)
    a = centroid_outer_volume(spec, 3, M=1024, probes=200_000, seed=SeedSpec(3))
    b = centroid_outer_volume(spec, 3, M=8192, probes=200_000, seed=SeedSpec(3))
    assert a.outer_volume == pytest.approx(b.outer_volume, rel=0.1)
    assert a.outer_volume >= b.outer_volume - 3 * math.hypot(a.stderr, b.stderr)


def test_outer_volume_nested_in_alpha():
    spec = make_spec("cube_solid", 2, isotropic=True)
    D = np.random.default_rng(4).standard_normal((64, 2))
    vols = [centroid_outer_volume(spec, a, directions=D, probes=200_000, seed=SeedSpec(5)).outer_volume
            for a in (1, 2, 4)]
    assert vols[0] <= vols[1] <= vols[2]


def test_paouris_disk():
    r = paouris_ratio(make_spec("ball", 2), 2, M=1024, probes=400_000, seed=SeedSpec(6))
    assert r == pytest.approx(math.sqrt(math.pi), rel=0.01)
    assert math.sqrt(ball_volume(2)) == pytest.approx(math.sqrt(math.pi))


def test_paouris_cube_n4():
    for alpha in (2, 3, 4):
        assert paouris_ratio(make_spec("cube_solid", 4), alpha, M=256, probes=100_000) <= 10


def test_level_set_sampler_stays_inside():
    for spec in (make_spec("cube_solid", 2), make_spec("ball", 3)):
        X = sample_rate_level_set(spec, 2.0, 200, SeedSpec(7))
        assert np.all(cramer_rate(spec, X) < 2.0)


def test_inclusion_origin_and_cube():
    rep = inclusion_check_LqZ(make_spec("cube_solid", 2), 2.0, trials=300, directions=128, seed=SeedSpec(8))
    assert rep.violations == 0 and 0 <= rep.max_ratio < 1
    with pytest.raises(ValueError):
        inclusion_check_LqZ(make_spec("cube_solid", 2), 1.0)


def test_reverse_inclusion_cube():
    rep = reverse_inclusion_check(make_spec("cube_solid", 2), 2.0, trials=300, directions=512, seed=SeedSpec(9))
    assert rep.violations == 0 and rep.max_ratio < 1


def test_support_many_rotation_invariant():
    spec = isotropize(make_spec("beta", 3, beta=1.0))
    T = np.random.default_rng(10).standard_normal((5, 3))
    h = centroid_support_many(spec, 3, T)
    assert np.allclose(h, [centroid_support(spec, 3, t) for t in T], rtol=1e-12)
