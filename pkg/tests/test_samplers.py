import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, stats

from oracles import radial_moment
from polythresh.core import SeedSpec
from polythresh.samplers import (DistributionSpec, SpecError, isotropic_constant, isotropize,
                                 make_spec, marginal_density_1d, radial_tail, sample,
                                 second_moment_1d, spec_from_fields, support_function,
                                 support_norm)

G0_LOW, G0_HIGH = 1 / (2 * math.sqrt(3) * math.e), math.sqrt(2)


def test_vertices_n1():
    pts = sample(make_spec("cube_vertices", 1), 40_000, SeedSpec(1)).points
    assert set(np.unique(pts)) == {-1.0, 1.0}
    assert abs(pts.mean()) < 3 / math.sqrt(len(pts))


@pytest.mark.parametrize("beta,expected", [(0.0, 3 / 5), (2.0, 1 / 3)])
def test_beta_second_moment(beta, expected):
    assert radial_moment(3, beta, 2) == pytest.approx(expected, rel=1e-12)
    pts = sample(make_spec("beta", 3, beta=beta), 100_000, SeedSpec(2)).points
    r2 = np.einsum("ij,ij->i", pts, pts)
    assert abs(r2.mean() - expected) < 4 * r2.std() / math.sqrt(len(r2))


def test_beta_radial_law_ks():
    n, beta, count = 3, 2.0, 100_000
    pts = sample(make_spec("beta", n, beta=beta), count, SeedSpec(3)).points
    r2 = np.einsum("ij,ij->i", pts, pts)
    ks = stats.kstest(r2, stats.beta(n / 2, beta + 1).cdf).statistic
    assert ks < 2 / math.sqrt(count)


@pytest.mark.parametrize("kind,scale", [("cube_vertices", 1.0), ("cube_solid", math.sqrt(3)),
                                        ("ball", math.sqrt(5))])
def test_isotropize_scale(kind, scale):
    assert isotropize(make_spec(kind, 3)).isotropic_scale == pytest.approx(scale, rel=1e-14)


@given(st.floats(-0.9, 20), st.integers(1, 12))
def test_beta_isotropic_scale(beta, n):
    spec = isotropize(make_spec("beta", n, beta=beta))
    assert spec.isotropic_scale == pytest.approx(math.sqrt(n + 2 * beta + 2), rel=1e-12)
    assert isotropize(spec) == spec


@pytest.mark.parametrize("kind", ["cube_solid", "ball", "beta", "product_1d"])
def test_isotropic_covariance(kind):
    base = (0.2, 1.0, 1.5, 1.0, 0.2) if kind == "product_1d" else None
    spec = make_spec(kind, 3, beta=1.5 if kind == "beta" else None, product_base=base, isotropic=True)
    count = 200_000
    pts = sample(spec, count, SeedSpec(4)).points
    assert np.abs(np.cov(pts.T) - np.eye(3)).max() < 6 / math.sqrt(count)


def test_marginal_examples():
    assert marginal_density_1d(make_spec("cube_solid", 5), 0.0) == pytest.approx(0.5)
    assert marginal_density_1d(make_spec("ball", 3), 0.0) == pytest.approx(0.75, rel=1e-13)
    with pytest.raises(SpecError):
        marginal_density_1d(make_spec("cube_vertices", 2), 0.0)


@pytest.mark.parametrize("spec", [make_spec("ball", 4), make_spec("beta", 3, beta=2.0),
                                  make_spec("beta", 2, beta=-0.5), make_spec("ball", 1),
                                  make_spec("cube_solid", 1)])
def test_marginal_normalised_and_symmetric(spec):
    total = integrate.quad(lambda t: float(marginal_density_1d(spec, t)), -1, 1)[0]
    assert total == pytest.approx(1.0, rel=1e-8)
    t = np.linspace(-0.99, 0.99, 41)
    assert np.allclose(marginal_density_1d(spec, t), marginal_density_1d(spec, -t))


@given(st.floats(0, 1))
def test_radial_tail_matches_density(a):
    spec = make_spec("beta", 4, beta=1.0)
    ref = integrate.quad(lambda t: float(marginal_density_1d(spec, t)), a, 1)[0]
    assert float(radial_tail(spec, a)) == pytest.approx(ref, abs=1e-10)


def test_support_norm_examples():
    assert support_norm(make_spec("cube_solid", 4), [1, 0, 0, 0]) == 1
    assert support_norm(make_spec("ball", 3), [0, 0, 0]) == 0
    assert support_norm(make_spec("beta", 3, beta=7.0), [0.3, 0.4, 0.0]) == pytest.approx(0.5)
    assert support_function(make_spec("cube_solid", 2), [1.0, -1.0]) == pytest.approx(2.0)


def test_isotropic_constant_cube():
    assert isotropic_constant(make_spec("cube_solid", 3)) == pytest.approx(1 / (2 * math.sqrt(3)), rel=1e-12)


def test_spec_text_round_trip():
    for spec in [make_spec("beta", 3, beta=2.5, isotropic=True), make_spec("cube_vertices", 15),
                 make_spec("product_1d", 2, product_base=(0.5, 1.0, 0.5))]:
        assert DistributionSpec.from_text(spec.to_text()) == spec


@pytest.mark.parametrize("fields", [{"kind": "nope", "dim": "2"}, {"kind": "beta", "dim": "3"},
                                    {"kind": "ball", "dim": "0"}, {"kind": "ball"},
                                    {"kind": "product_1d", "dim": "2", "product_base": "1,2"}])
def test_bad_specs(fields):
    with pytest.raises(SpecError):
        spec_from_fields(fields)


def test_sampling_is_seeded():
    spec = make_spec("beta", 5, beta=0.5)
    a = sample(spec, 1000, SeedSpec(9, 2)).points
    assert np.array_equal(a, sample(spec, 1000, SeedSpec(9, 2)).points)
    assert not np.array_equal(a, sample(spec, 1000, SeedSpec(9, 3)).points)


def test_marginal_kappa_concavity_grid():
    """Power kappa/(1-kappa) of the first marginal of beta(2), n=3 is concave."""
    spec = make_spec("beta", 3, beta=2.0)
    k = spec.kappa
    t = np.linspace(-1, 1, 200)
    g = marginal_density_1d(spec, t) ** (k / (1 - k))
    assert np.max(g[2:] - 2 * g[1:-1] + g[:-2]) <= 1e-6


@pytest.mark.parametrize("spec", [make_spec("cube_solid", 3), make_spec("ball", 2), make_spec("ball", 7),
                                  make_spec("beta", 3, beta=2.0), make_spec("beta", 6, beta=0.3),
                                  make_spec("product_1d", 2, product_base=(0.1, 0.6, 1.0, 0.6, 0.1))])
def test_isotropic_marginal_at_zero(spec):
    g0 = float(marginal_density_1d(isotropize(spec), 0.0))
    assert G0_LOW <= g0 <= G0_HIGH


def test_second_moments():
    assert second_moment_1d(make_spec("cube_solid", 4)) == pytest.approx(1 / 3)
    assert second_moment_1d(make_spec("cube_vertices", 4)) == 1.0
    assert second_moment_1d(make_spec("beta", 3, beta=2.0)) == pytest.approx(1 / 9)
