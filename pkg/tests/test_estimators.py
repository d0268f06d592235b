"""Estimator oracles: exact degenerate cases, scaling laws, cross-checks."""

import math

import numpy as np
import pytest
from scipy import stats

from sle_lab import (
    BadGrid,
    ExponentRegime,
    SubpowerEnvelope,
    SupercriticalR,
    TooFewPoints,
    ValidationError,
    calibrate_envelope,
    check_event_E,
    derive_exponents,
    deterministic_driver,
    estimate_holder,
    estimate_moment,
    estimate_typical_exponent,
    flow_derivative_samples,
    sample_brownian,
    solve_critical,
    trace,
    y_n_statistic,
    yn_correlation_table,
)


def test_moment_r_zero_is_exactly_one():
    m = estimate_moment(8 / 3, 0.0, [2.0, 4.0], 200, seed=3)
    np.testing.assert_array_equal(m.mean, 1.0)
    assert m.slope == 0.0
    assert not m.heavy_tail.any()


def test_moment_guards():
    with pytest.raises(BadGrid):
        estimate_moment(8 / 3, 1.0, [0.5, 2.0], 200)
    with pytest.raises(BadGrid):
        estimate_moment(8 / 3, 1.0, [2.0, 64.0], 200)
    with pytest.raises(SupercriticalR):
        estimate_moment(8.0, 1.0, [2.0, 4.0], 200)
    with pytest.raises(TooFewPoints):
        estimate_moment(8 / 3, 1.0, [2.0, 4.0], 50)
    with pytest.raises(ValidationError):
        estimate_moment(8 / 3, 1.0, [2.0, 4.0], 200, method="exact")


def test_moment_routes_agree():
    # slit-map flow and radial surrogate sample the same moment
    flow = estimate_moment(8 / 3, 1.0, [4.0], 6000, seed=21, method="reverse_flow")
    diff = estimate_moment(8 / 3, 1.0, [4.0], 6000, seed=22, method="diffusion")
    gap = abs(flow.mean[0] - diff.mean[0])
    joint = math.hypot(flow.stderr[0], diff.stderr[0])
    assert gap <= 3 * joint


def test_flow_law_is_scale_invariant():
    # |h'_t(i y)| and |h'_{4t}(2 i y)| share a law; distinct seeds keep
    # the two empirical samples independent
    lo = flow_derivative_samples(2.0, 0.25, 5000, seed=40, y=0.05)
    hi = flow_derivative_samples(2.0, 1.0, 5000, seed=41, y=0.1)
    assert stats.ks_2samp(lo, hi).statistic <= 0.04


def test_typical_exponent_constant_driver():
    drv = deterministic_driver("constant", 1.0, 1e-3, a=2.0)
    te = estimate_typical_exponent(
        2.0, 1.0, np.geomspace(1e-3, 1e-1, 8), 1, path=drv
    )
    assert abs(te.slope - 1.0) <= 0.01


def test_typical_exponent_guards():
    with pytest.raises(BadGrid):
        estimate_typical_exponent(2.0, 1.0, [0.05], 10)
    with pytest.raises(BadGrid):
        estimate_typical_exponent(2.0, 1.0, [1e-5, 1e-2], 10)
    with pytest.raises(BadGrid):
        estimate_typical_exponent(2.0, 1.0, [0.01, 0.5], 10)
    with pytest.raises(TooFewPoints):
        estimate_typical_exponent(2.0, 1.0, [0.01, 0.1], 1)


HOLDER_N = 2**14 + 1
HOLDER_DT = 2.0**-15


def test_holder_constant_driver_is_one_half():
    path = deterministic_driver("constant", 1.0, HOLDER_DT)
    times = np.linspace(0.0, 1.0, HOLDER_N)
    h = estimate_holder(trace(path, times), eps=0.0)
    assert abs(h.alpha_hat - 0.5) < 0.03
    assert np.all(np.diff(h.osc) >= 0)
    assert h.interval == (0.0, 1.0)


def test_holder_linear_driver_stays_near_one_half():
    path = deterministic_driver("linear", 1.0, HOLDER_DT)
    times = np.linspace(0.0, 1.0, HOLDER_N)
    h = estimate_holder(trace(path, times), eps=0.0)
    assert 0.45 < h.alpha_hat < 0.55


def test_holder_guards():
    path = deterministic_driver("constant", 1.0, 1e-3)
    small = trace(path, np.linspace(0.0, 1.0, 512))
    with pytest.raises(TooFewPoints):
        estimate_holder(small)
    ragged = trace(path, np.concatenate([np.linspace(0, 0.5, 700),
                                         np.linspace(0.51, 1.0, 700)]))
    with pytest.raises(BadGrid):
        estimate_holder(ragged)
    ok = trace(path, np.linspace(0.0, 1.0, 1100))
    with pytest.raises(BadGrid):
        estimate_holder(ok, eps=2.0)


def test_event_check_examples():
    s = np.array([1.0, 2.0, 4.0, 8.0])
    habs = np.exp(-0.3 * np.log(s))
    assert check_event_E(s, habs, -0.3, SubpowerEnvelope(c=1e6, p=1.0))
    # noise-free flow: |h'_{s^2}(i)| = (1 + 2 a s^2)^(-1/2) tracks
    # beta = -1 within a modest constant, and beta = +1 not at all
    a = 0.75
    habs = (1.0 + 2.0 * a * s**2) ** -0.5
    assert check_event_E(s, habs, -1.0, SubpowerEnvelope(c=4.0, p=1.0))
    assert not check_event_E(s, habs, 1.0, SubpowerEnvelope(c=4.0, p=1.0))
    assert not check_event_E(s, np.zeros_like(s), -1.0, SubpowerEnvelope(c=4.0, p=1.0))
    with pytest.raises(ValidationError):
        check_event_E(s, habs[:2], -1.0, SubpowerEnvelope(c=4.0, p=1.0))
    with pytest.raises(ValidationError):
        check_event_E([0.5, 1.0], [1.0, 1.0], -1.0, SubpowerEnvelope(c=4.0, p=1.0))


def test_yn_rejects_the_supercritical_weight():
    crit = solve_critical(6.0)
    r_c = derive_exponents(6.0, 0.0).r_c
    assert crit.r_plus < r_c
    with pytest.raises(ExponentRegime):
        y_n_statistic(6.0, r_c - 1e-9, 4, 10, envelope=SubpowerEnvelope(2.0, 1.0))


def test_yn_small_n_smoke():
    yn = y_n_statistic(8 / 3, 1.0, 2, 40, seed=1, envelope=SubpowerEnvelope(2.25, 1.0))
    assert 0.0 <= yn.ratio <= 1.0
    assert np.isfinite(yn.mean_Y)
    assert np.all(yn.per_term >= 0)
    np.testing.assert_array_equal(yn.j_values, np.arange(2, 5))
    assert 0.0 <= yn.event_rate <= 1.0
    with pytest.raises(BadGrid):
        y_n_statistic(8 / 3, 1.0, 128, 10, envelope=SubpowerEnvelope(2.0, 1.0))
    with pytest.raises(TooFewPoints):
        y_n_statistic(8 / 3, 1.0, 4, 1, envelope=SubpowerEnvelope(2.0, 1.0))


def test_envelope_calibration_is_deterministic():
    env1 = calibrate_envelope(8 / 3, 1.0, seed=3)
    env2 = calibrate_envelope(8 / 3, 1.0, seed=3)
    assert env1.c == env2.c
    assert 1.5 < env1.c < 3.5
    assert env1.p == 1.0


def test_correlation_table_shapes():
    offsets, corr, shape = yn_correlation_table(
        8 / 3, 1.0, 8, 60, seed=2, envelope=SubpowerEnvelope(2.25, 1.0),
        offsets=(1, 2, 4),
    )
    assert offsets.size == corr.size == shape.size == 3
    assert np.all(corr >= 0)
    assert np.all(np.diff(shape) < 0)


def test_worker_count_never_changes_results():
    one = flow_derivative_samples(2.0, 1.0, 40, seed=6, workers=1)
    two = flow_derivative_samples(2.0, 1.0, 40, seed=6, workers=2)
    np.testing.assert_array_equal(one, two)

    m1 = estimate_moment(8 / 3, 1.0, [2.0, 4.0], 100, seed=5, workers=1)
    m2 = estimate_moment(8 / 3, 1.0, [2.0, 4.0], 100, seed=5, workers=2)
    np.testing.assert_array_equal(m1.mean, m2.mean)

    env = SubpowerEnvelope(2.25, 1.0)
    y1 = y_n_statistic(8 / 3, 1.0, 4, 8, seed=2, envelope=env, workers=1)
    y2 = y_n_statistic(8 / 3, 1.0, 4, 8, seed=2, envelope=env, workers=2)
    assert y1.mean_Y == y2.mean_Y
    np.testing.assert_array_equal(y1.per_term, y2.per_term)


def test_brownian_holder_sits_below_one_half():
    # one seed at module scale; the acceptance suite runs the ensemble
    path = sample_brownian(2.0, 1.0, HOLDER_DT, seed=0)
    times = np.linspace(0.0, 1.0, HOLDER_N)
    h = estimate_holder(trace(path, times), eps=0.1)
    assert 0.15 < h.alpha_hat < 0.55
    assert h.r2 > 0.9
