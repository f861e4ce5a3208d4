import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import central_lower_oracle
from polythresh.bounds import (NU_CUBE_SOLID, NU_CUBE_VERTICES, ThresholdQuery, central_lower,
                               central_upper, log_thm2_required_N, thm1_envelope,
                               thm2_beta_level, thm2_floating_radius, thm2_required_N, threshold_N)
from polythresh.samplers import isotropic_constant, make_spec


def test_nu_constants():
    assert NU_CUBE_VERTICES == pytest.approx(1.2130613194252668, rel=1e-15)
    assert NU_CUBE_SOLID == pytest.approx(2.139, abs=1e-3)


def test_central_upper():
    assert central_upper(2.0, 0.01, 1.0, 50) == pytest.approx(2.5)
    with pytest.raises(ValueError):
        central_upper(1.0, 1.5, 1.0, 3)


def test_central_lower_examples():
    assert central_lower(3.0, 1.0, 10, 2).clamped == 3.0
    low = central_lower(1.0, 0.0, 4, 3)
    assert low.raw == pytest.approx(1 - 2 * 4) and low.clamped == 0.0
    d = central_lower(1.0, 0.5, 3, 3)
    assert d.degenerate and d.clamped == 0.0


def test_central_lower_against_big_float():
    low = central_lower(1.0, 0.01, 10 ** 4, 10)
    log_ref, value_ref = central_lower_oracle(1.0, 0.01, 10 ** 4, 10)
    assert low.log_correction == pytest.approx(log_ref, rel=1e-10)
    assert low.raw == pytest.approx(value_ref, rel=1e-10)


@given(st.floats(0.001, 0.999), st.integers(1, 6), st.integers(1, 3000))
def test_central_lower_matches_oracle(q, n, extra):
    N = n + extra
    low = central_lower(2.0, q, N, n)
    log_ref, _ = central_lower_oracle(2.0, q, N, n)
    assert low.log_correction == pytest.approx(log_ref, rel=1e-10, abs=1e-10)
    assert 0.0 <= low.clamped <= 2.0


@given(st.floats(0.01, 0.5), st.integers(1, 5), st.integers(0, 2000))
def test_central_lower_nondecreasing_past_vacuous(q, n, N):
    N = max(N, n + 1)
    a, b = central_lower(1.0, q, N, n), central_lower(1.0, q, N + 1, n)
    if a.raw > 0:
        assert b.raw >= a.raw - 1e-12


def test_threshold_examples():
    t = threshold_N(ThresholdQuery("cube_vertices", 15))
    assert t.low == t.high == pytest.approx(18.1234686410042, rel=1e-12)
    assert math.floor(t.low / 2) == 9 and math.ceil(4 * t.low) == 73
    assert threshold_N(ThresholdQuery("ball", 4)).low == pytest.approx(16.0, rel=1e-14)
    assert threshold_N(ThresholdQuery("beta_refined", 10, 1.0, 1.0)).low == pytest.approx(15625, rel=1e-13)
    with pytest.raises(ValueError):
        ThresholdQuery("simplex", 3)


@given(st.integers(1, 200), st.floats(0, 0.99))
def test_threshold_ratio_exact(n, eps):
    t = threshold_N(ThresholdQuery("cube_vertices", n, eps))
    nu = NU_CUBE_VERTICES
    assert t.log_high - t.log_low == pytest.approx(n * math.log((nu + eps) / (nu - eps)), rel=1e-12, abs=1e-12)


def test_threshold_overflow_keeps_log():
    t = threshold_N(ThresholdQuery("ball", 10 ** 4, 0.1))
    assert t.high == math.inf and math.isfinite(t.log_high)


def test_thm1_envelope():
    N, cap = thm1_envelope(100, 1.0, 0.01, 0.01)
    assert N == pytest.approx(math.e) and cap == pytest.approx(1 / math.e)
    assert thm1_envelope(10, math.inf) == (1.0, 1.0)
    L = isotropic_constant(make_spec("cube_solid", 6))
    N, cap = thm1_envelope(6, L)
    assert N == pytest.approx(math.exp(0.01 * 6 * 12)) and 0 < cap < 1


def test_thm2_required_N():
    assert thm2_required_N(2, 0.25, math.e) == pytest.approx(math.exp(4 * (math.log(2) + 2)), rel=1e-13)
    assert thm2_required_N(2, 0.25, math.e) == pytest.approx(4.77e4, rel=1e-3)
    assert thm2_required_N(3, 0.25, 1 + 1e-12) == pytest.approx(3 ** 4, rel=1e-9)
    kappa = make_spec("beta", 3, beta=2.0).kappa
    assert thm2_required_N(3, kappa, 10) == pytest.approx(2.43e12, rel=1e-12)
    for bad in (0.0, 0.5):
        with pytest.raises(ValueError):
            log_thm2_required_N(2, bad, 2.0)


def test_thm2_radius():
    assert thm2_floating_radius(0.2, 0.0) == (1.0, False)
    assert thm2_floating_radius(1.0, 1 / 32)[0] == pytest.approx(0.5)
    r, vacuous = thm2_floating_radius(0.2, thm2_beta_level(3, 10))
    assert not vacuous and r == pytest.approx(1 - 80 ** 0.2 / 1920, rel=1e-15)
    assert r == pytest.approx(0.998749, abs=1e-6)
    assert thm2_floating_radius(0.2, 1.0) == (0.0, True)


def test_calculators_are_pure():
    args = (1.0, 0.013, 777, 4)
    assert central_lower(*args) == central_lower(*args)
